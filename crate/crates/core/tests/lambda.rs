use flatlab::families::{cover_certificate, lambda_exact};

fn covers(marks: &[usize], r: usize) -> bool {
    let mut seen = vec![false; r + 1];
    for (i, &a) in marks.iter().enumerate() {
        for &b in &marks[i + 1..] {
            seen[a.abs_diff(b)] = true;
        }
    }
    seen[1..].iter().all(|&s| s)
}

/// Any cover of size `k` exists, by plain enumeration of interior marks.
fn exists_cover(r: usize, k: usize) -> bool {
    if k < 2 {
        return false;
    }
    let inner = k - 2;
    let mut idx: Vec<usize> = (1..=inner).collect();
    if inner > r.saturating_sub(1) {
        return false;
    }
    loop {
        let mut marks = vec![0, r];
        marks.extend(&idx);
        if covers(&marks, r) {
            return true;
        }
        // next combination of `inner` values from 1..r-1
        let mut i = inner;
        loop {
            if i == 0 {
                return false;
            }
            i -= 1;
            if idx[i] < r - 1 - (inner - 1 - i) {
                idx[i] += 1;
                for t in i + 1..inner {
                    idx[t] = idx[t - 1] + 1;
                }
                break;
            }
        }
    }
}

#[test]
fn lambda_is_minimal_up_to_30() {
    for r in 1..=30u64 {
        let res = lambda_exact(r, None).unwrap();
        let l = res.lambda.unwrap();
        assert!(res.complete);
        assert_eq!(res.witness.len(), l);
        assert!(cover_certificate(&res.witness, r).unwrap().is_cover);
        assert!(!exists_cover(r as usize, l - 1), "R = {r}: a cover of size {} exists", l - 1);
    }
}

#[test]
fn known_values() {
    // minimal difference bases of [1, n]
    let expect = [(1u64, 2usize), (3, 3), (6, 4), (9, 5), (13, 6), (17, 7), (23, 8), (29, 9), (36, 10)];
    for (r, l) in expect {
        assert_eq!(lambda_exact(r, None).unwrap().lambda, Some(l), "R = {r}");
    }
}
