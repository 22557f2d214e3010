//! Seeded random polynomial data for randomized property suites.

use rand::Rng;

use crate::chart::{ChartConnection, Domain, OneFormField};
use crate::poly::PolyField;

/// Dense random polynomial of total degree `<= degree` with coefficients
/// uniform in `[-1, 1]`.
pub fn random_poly<R: Rng + ?Sized>(rng: &mut R, n: usize, degree: u32) -> PolyField {
    let terms = exponents_up_to(n, degree)
        .into_iter()
        .map(|e| (e, rng.gen_range(-1.0..=1.0)))
        .collect::<Vec<_>>();
    PolyField::from_terms(n, terms).expect("exponents have length n")
}

/// Random torsion-free connection on `[-1, 1]^n`.
pub fn random_connection<R: Rng + ?Sized>(rng: &mut R, n: usize, degree: u32) -> ChartConnection {
    let mut raw = vec![PolyField::zero(n); n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in j..n {
                let p = random_poly(rng, n, degree);
                raw[(i * n + k) * n + j] = p.clone();
                raw[(i * n + j) * n + k] = p;
            }
        }
    }
    ChartConnection::from_fn(Domain::symmetric_unit(n), |i, j, k| {
        raw[(i * n + j) * n + k].clone()
    })
    .expect("n >= 2")
}

pub fn random_one_form<R: Rng + ?Sized>(rng: &mut R, n: usize, degree: u32) -> OneFormField {
    OneFormField::new((0..n).map(|_| random_poly(rng, n, degree)).collect())
        .expect("components share n")
}

/// All exponent vectors of length `n` with total degree `<= degree`, in
/// lexicographic order.
pub fn exponents_up_to(n: usize, degree: u32) -> Vec<Vec<u32>> {
    fn rec(n: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for e in 0..=left {
            cur.push(e);
            rec(n, left - e, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, degree, &mut Vec::with_capacity(n), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn exponent_count() {
        // C(n + d, d)
        assert_eq!(exponents_up_to(2, 2).len(), 6);
        assert_eq!(exponents_up_to(3, 2).len(), 10);
    }

    #[test]
    fn random_connections_are_torsion_free() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [2, 3] {
            let c = random_connection(&mut rng, n, 2);
            assert_eq!(c.torsion_residual(), 0.0);
            assert!(c.max_abs_coeff() <= 1.0);
        }
    }
}
