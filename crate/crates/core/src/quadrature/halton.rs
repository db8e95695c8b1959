//! Randomly shifted Halton points.

const PRIMES: [u64; 24] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89,
];

pub const MAX_DIM: usize = PRIMES.len();

/// Van der Corput radical inverse of `index` in `base`.
pub fn radical_inverse(base: u64, mut index: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut out = 0.0;
    while index > 0 {
        out += f * (index % base) as f64;
        index /= base;
        f *= inv;
    }
    out
}

/// Fills `out` with the Halton point `index` (1-based to skip the origin),
/// Cranley-Patterson rotated by `shift`.
pub fn point(index: u64, shift: &[f64], out: &mut [f64]) {
    for (k, o) in out.iter_mut().enumerate() {
        let v = radical_inverse(PRIMES[k], index + 1) + shift[k];
        *o = v - v.floor();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn base_two_sequence() {
        let v: Vec<f64> = (1..8).map(|i| radical_inverse(2, i)).collect();
        assert_eq!(v, vec![0.5, 0.25, 0.75, 0.125, 0.625, 0.375, 0.875]);
    }

    #[test]
    fn shifted_points_stay_in_unit_cube() {
        let mut p = [0.0; 5];
        for i in 0..1000 {
            point(i, &[0.9, 0.3, 0.99, 0.0, 0.5], &mut p);
            assert!(p.iter().all(|v| (0.0..1.0).contains(v)));
        }
    }
}
