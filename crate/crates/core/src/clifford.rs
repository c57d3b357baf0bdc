//! Fiberwise spin^c algebra on the flat 4-torus.
//!
//! `W+` and `W-` fibers are both `C^2`. Clifford multiplication by the unit
//! vector `e_mu` maps `W+ -> W-` through the unitary matrix `sigma_mu`; on
//! `W+ (+) W-` it is `e_mu = [[0, -sigma_mu^H], [sigma_mu, 0]]`, so that
//! `e_mu e_nu + e_nu e_mu = -2 delta_{mu nu}`. Products of two directions act
//! on `W+` through the bivectors `B_{mu nu} = -sigma_mu^H sigma_nu`.
//!
//! The fiber inner product is Hermitian and conjugate-linear in its second
//! slot: `<u, v> = sum_i u_i conj(v_i)`.

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{forms::star_fiber, PLANES};

pub type Spinor = Vector2<Complex64>;
/// A `W+` fiber value.
pub type SpinorPlus = Spinor;
/// A `W-` fiber value.
pub type SpinorMinus = Spinor;
pub type Mat2 = Matrix2<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Hermitian fiber product `<u, v>`, linear in `u`.
#[inline]
pub fn inner(u: &Spinor, v: &Spinor) -> Complex64 {
    v.dotc(u)
}

#[inline]
pub fn norm_sqr(u: &Spinor) -> f64 {
    u[0].norm_sqr() + u[1].norm_sqr()
}

/// The Pauli matrices `tau_1, tau_2, tau_3`, with `tau_1 tau_2 = i tau_3`.
pub fn pauli() -> [Mat2; 3] {
    [
        Mat2::new(ZERO, ONE, ONE, ZERO),
        Mat2::new(ZERO, -I, I, ZERO),
        Mat2::new(ONE, ZERO, ZERO, -ONE),
    ]
}

#[derive(Clone, Debug, PartialEq)]
pub struct CliffordTable {
    sigma: [Mat2; 4],
    sigma_adj: [Mat2; 4],
    bivector: [Mat2; 6],
}

impl CliffordTable {
    /// Build a table from the four `W+ -> W-` matrices. No validation is done
    /// here; see [`CliffordTable::relation_defect`].
    pub fn from_sigmas(sigma: [Mat2; 4]) -> Self {
        let sigma_adj = sigma.map(|s| s.adjoint());
        let bivector = PLANES.map(|(mu, nu)| -(sigma_adj[mu] * sigma[nu]));
        Self {
            sigma,
            sigma_adj,
            bivector,
        }
    }

    #[inline]
    pub fn sigma(&self, mu: usize) -> &Mat2 {
        &self.sigma[mu]
    }

    #[inline]
    pub fn sigma_adjoint(&self, mu: usize) -> &Mat2 {
        &self.sigma_adj[mu]
    }

    /// `B_{mu nu}` for plane index `p` into [`PLANES`].
    #[inline]
    pub fn bivector(&self, p: usize) -> &Mat2 {
        &self.bivector[p]
    }

    /// Largest entry of `sigma_mu^H sigma_nu + sigma_nu^H sigma_mu - 2 delta`
    /// and of the `W-` counterpart, over all `mu, nu`.
    pub fn relation_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for mu in 0..4 {
            for nu in 0..4 {
                let target = if mu == nu {
                    Mat2::identity() * Complex64::new(2.0, 0.0)
                } else {
                    Mat2::zeros()
                };
                let plus = self.sigma_adj[mu] * self.sigma[nu] + self.sigma_adj[nu] * self.sigma[mu];
                let minus = self.sigma[mu] * self.sigma_adj[nu] + self.sigma[nu] * self.sigma_adj[mu];
                for m in [plus - target, minus - target] {
                    worst = worst.max(m.iter().map(|c| c.norm()).fold(0.0, f64::max));
                }
            }
        }
        worst
    }

    /// Largest deviation of `B_{mu nu}` from the self-dual pattern
    /// `B_01 = B_23`, `B_02 = -B_13`, `B_03 = B_12`. Zero means the table
    /// is positively oriented, so that `W+` is acted on by self-dual forms.
    pub fn orientation_defect(&self) -> f64 {
        let b = &self.bivector;
        [b[0] - b[5], b[1] + b[4], b[2] - b[3]]
            .iter()
            .flat_map(|m| m.iter().map(|c| c.norm()))
            .fold(0.0, f64::max)
    }
}

/// `sigma_4 = Id`, `sigma_k = -i tau_k`.
///
/// The sign of the spatial matrices fixes the orientation: with it, the
/// bivectors of the self-dual planes coincide and anti-self-dual two-forms
/// act trivially on `W+`.
pub fn standard_table() -> CliffordTable {
    let [t1, t2, t3] = pauli();
    CliffordTable::from_sigmas([t1 * -I, t2 * -I, t3 * -I, Mat2::identity()])
}

/// Clifford multiplication `e_mu . phi`, `W+ -> W-`.
pub fn clifford_mult(tbl: &CliffordTable, mu: usize, phi: &SpinorPlus) -> Result<SpinorMinus> {
    if mu >= 4 {
        return Err(Error::DirectionOutOfRange(mu));
    }
    Ok(tbl.sigma[mu] * phi)
}

/// `sigma(phi)_{mu nu} = (i/4) <B_{mu nu} phi, phi>`, a self-dual fiber.
pub fn quadratic_form(tbl: &CliffordTable, phi: &SpinorPlus) -> [f64; 6] {
    std::array::from_fn(|p| (I * 0.25 * inner(&(tbl.bivector[p] * phi), phi)).re)
}

/// `sum_{mu<nu} w_{mu nu} B_{mu nu} phi` for an arbitrary two-form fiber.
pub fn two_form_action(tbl: &CliffordTable, w: &[f64; 6], phi: &SpinorPlus) -> SpinorPlus {
    let mut m = Mat2::zeros();
    for (p, &wp) in w.iter().enumerate() {
        if wp != 0.0 {
            m += tbl.bivector[p] * Complex64::new(wp, 0.0);
        }
    }
    m * phi
}

/// [`two_form_action`] restricted to self-dual fibers.
pub fn selfdual_action(tbl: &CliffordTable, w: &[f64; 6], phi: &SpinorPlus) -> Result<SpinorPlus> {
    let s = star_fiber(w);
    let asd: f64 = (0..6).map(|p| (0.5 * (w[p] - s[p])).powi(2)).sum::<f64>().sqrt();
    let norm: f64 = w.iter().map(|v| v * v).sum::<f64>().sqrt();
    if asd > 1e-10 * norm {
        return Err(Error::NotSelfDual { residual: asd });
    }
    Ok(two_form_action(tbl, w, phi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::forms::selfdual_fiber;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_spinor(rng: &mut impl Rng) -> Spinor {
        Spinor::new(
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
        )
    }

    fn max_entry(m: &Mat2) -> f64 {
        m.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn standard_table_satisfies_relations() {
        let tbl = standard_table();
        assert!(tbl.relation_defect() <= 1e-15);
        assert_eq!(tbl.orientation_defect(), 0.0);
        for mu in 0..4 {
            let u = tbl.sigma(mu) * tbl.sigma_adjoint(mu);
            assert!(max_entry(&(u - Mat2::identity())) <= 1e-15);
        }
        for p in 0..6 {
            let b = tbl.bivector(p);
            assert!(max_entry(&(b + b.adjoint())) <= 1e-15, "B must be skew-Hermitian");
        }
    }

    #[test]
    fn pauli_product_convention() {
        let [t1, t2, t3] = pauli();
        assert!(max_entry(&(t1 * t2 - t3 * I)) == 0.0);
    }

    #[test]
    fn e_mu_squares_to_minus_identity() {
        let tbl = standard_table();
        for mu in 0..4 {
            // e_mu^2 restricted to W+ is -sigma^H sigma, to W- is -sigma sigma^H
            let plus = -(tbl.sigma_adjoint(mu) * tbl.sigma(mu));
            let minus = -(tbl.sigma(mu) * tbl.sigma_adjoint(mu));
            assert!(max_entry(&(plus + Mat2::identity())) <= 1e-15);
            assert!(max_entry(&(minus + Mat2::identity())) <= 1e-15);
        }
    }

    #[test]
    fn selfdual_bivectors_commute() {
        let tbl = standard_table();
        let (b01, b23) = (tbl.bivector(0), tbl.bivector(5));
        assert!(max_entry(&(b01 * b23 - b23 * b01)) <= 1e-15);
    }

    #[test]
    fn opposite_orientation_is_detected() {
        let [t1, t2, t3] = pauli();
        let flipped = CliffordTable::from_sigmas([t1 * I, t2 * I, t3 * I, Mat2::identity()]);
        assert!(flipped.relation_defect() <= 1e-15);
        assert!(flipped.orientation_defect() > 1.0);
    }

    #[test]
    fn clifford_mult_is_isometric() {
        let tbl = standard_table();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(clifford_mult(&tbl, 2, &Spinor::zeros()).unwrap(), Spinor::zeros());
        assert!(clifford_mult(&tbl, 4, &Spinor::zeros()).is_err());
        for _ in 0..100 {
            let phi = random_spinor(&mut rng);
            let n = norm_sqr(&phi);
            let images: Vec<Spinor> = (0..4).map(|mu| clifford_mult(&tbl, mu, &phi).unwrap()).collect();
            for mu in 0..4 {
                assert!((norm_sqr(&images[mu]) - n).abs() <= 1e-14 * n);
                for nu in 0..4 {
                    let lhs = inner(&images[mu], &images[nu]) + inner(&images[nu], &images[mu]);
                    let rhs = if mu == nu { 2.0 * n } else { 0.0 };
                    assert!((lhs - rhs).norm() <= 1e-14 * n.max(1e-300));
                }
            }
        }
    }

    #[test]
    fn quadratic_form_identities() {
        let tbl = standard_table();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        assert_eq!(quadratic_form(&tbl, &Spinor::zeros()), [0.0; 6]);
        for _ in 0..100 {
            let phi = random_spinor(&mut rng);
            let n2 = norm_sqr(&phi);
            let q = quadratic_form(&tbl, &phi);
            // the complex value must already be real
            for p in 0..6 {
                let z = I * 0.25 * inner(&(tbl.bivector(p) * phi), &phi);
                assert!(z.im.abs() <= 1e-15 * n2);
            }
            // self-dual
            let sd = selfdual_fiber(&q);
            let asd: f64 = (0..6).map(|p| (q[p] - sd[p]).powi(2)).sum::<f64>().sqrt();
            assert!(asd <= 1e-14 * n2);
            // |sigma|^2 = |phi|^4 / 8
            let s2: f64 = q.iter().map(|v| v * v).sum();
            assert!((s2 - n2 * n2 / 8.0).abs() <= 1e-12 * n2 * n2);
            // sesquilinearity
            let lambda = Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            let ql = quadratic_form(&tbl, &(phi * lambda));
            for p in 0..6 {
                assert!((ql[p] - lambda.norm_sqr() * q[p]).abs() <= 1e-13 * n2 * lambda.norm_sqr());
            }
        }
    }

    #[test]
    fn selfdual_action_is_hermitian_after_i() {
        let tbl = standard_table();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let w0 = [0.0; 6];
        assert_eq!(selfdual_action(&tbl, &w0, &random_spinor(&mut rng)).unwrap(), Spinor::zeros());
        for _ in 0..100 {
            let raw: [f64; 6] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
            let w = selfdual_fiber(&raw);
            let mut m = Mat2::zeros();
            for p in 0..6 {
                m += tbl.bivector(p) * Complex64::new(w[p], 0.0);
            }
            let herm = m * I;
            assert!(max_entry(&(herm - herm.adjoint())) <= 1e-15);
            let phi = random_spinor(&mut rng);
            let z = inner(&(selfdual_action(&tbl, &w, &phi).unwrap() * I), &phi);
            assert!(z.im.abs() <= 1e-14);
        }
    }

    #[test]
    fn action_of_quadratic_form_on_its_spinor() {
        // i <sum sigma_p B_p phi, phi> = sum sigma_p * 4 sigma_p = 4 |sigma|^2 = |phi|^4 / 2
        let tbl = standard_table();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let phi = random_spinor(&mut rng);
            let q = quadratic_form(&tbl, &phi);
            let lhs = inner(&(selfdual_action(&tbl, &q, &phi).unwrap() * I), &phi);
            let s2: f64 = q.iter().map(|v| v * v).sum();
            let n2 = norm_sqr(&phi);
            assert!((lhs.re - 4.0 * s2).abs() <= 1e-13 * n2 * n2);
            assert!((lhs.re - n2 * n2 / 2.0).abs() <= 1e-13 * n2 * n2);
        }
    }

    #[test]
    fn antiselfdual_forms_act_trivially_and_are_rejected() {
        let tbl = standard_table();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let raw: [f64; 6] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let sd = selfdual_fiber(&raw);
        let asd: [f64; 6] = std::array::from_fn(|p| raw[p] - sd[p]);
        let phi = random_spinor(&mut rng);
        assert!(norm_sqr(&two_form_action(&tbl, &asd, &phi)) < 1e-28);
        assert!(matches!(
            selfdual_action(&tbl, &asd, &phi),
            Err(Error::NotSelfDual { .. })
        ));
    }
}
