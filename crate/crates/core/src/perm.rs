//! Permutations of `0..n` in lexicographic order, with signs.

/// All permutations of `0..n`, lexicographically ordered.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = (0..n).collect();
    loop {
        out.push(current.clone());
        if !next_permutation(&mut current) {
            return out;
        }
    }
}

/// Advances to the next permutation in lexicographic order; false after the last one.
pub fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let Some(pivot) = (0..v.len() - 1).rev().find(|&i| v[i] < v[i + 1]) else {
        return false;
    };
    let succ = (pivot + 1..v.len()).rev().find(|&j| v[j] > v[pivot]).expect("suffix has a larger element");
    v.swap(pivot, succ);
    v[pivot + 1..].reverse();
    true
}

/// +1 or -1 by inversion parity. Works for any sequence of distinct values.
pub fn sign(v: &[usize]) -> i8 {
    let mut inversions = 0usize;
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            if v[i] > v[j] {
                inversions += 1;
            }
        }
    }
    if inversions.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

pub fn factorial(n: usize) -> usize {
    (1..=n).product()
}
