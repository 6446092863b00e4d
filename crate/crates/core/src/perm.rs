//! Permutations with signs, in a fixed deterministic order.

/// All permutations of `0..k` paired with their signs, Heap's algorithm order.
pub fn signed_permutations(k: usize) -> Vec<(Vec<usize>, f64)> {
    let mut out = Vec::new();
    let mut a: Vec<usize> = (0..k).collect();
    let mut c = vec![0usize; k];
    let mut sign = 1.0;
    out.push((a.clone(), sign));
    let mut i = 1;
    while i < k {
        if c[i] < i {
            if i % 2 == 0 {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            sign = -sign;
            out.push((a.clone(), sign));
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out
}

/// Sign of the permutation that sorts `v` (distinct entries), or 0 on repeats.
pub fn sort_sign(v: &mut [usize]) -> i32 {
    let mut sign = 1;
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
        if j > 0 && v[j - 1] == v[j] {
            return 0;
        }
    }
    sign
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_and_signs() {
        for k in 0..6 {
            let perms = signed_permutations(k);
            assert_eq!(perms.len() as f64, factorial(k));
            let total: f64 = perms.iter().map(|p| p.1).sum();
            assert_eq!(total, if k <= 1 { 1.0 } else { 0.0 });
            for (p, s) in perms {
                let mut q = p.clone();
                assert_eq!(f64::from(sort_sign(&mut q)), s);
            }
        }
    }

    #[test]
    fn repeats_give_zero() {
        assert_eq!(sort_sign(&mut [3, 1, 3]), 0);
        assert_eq!(sort_sign(&mut [2, 1]), -1);
        assert_eq!(sort_sign(&mut []), 1);
    }
}
