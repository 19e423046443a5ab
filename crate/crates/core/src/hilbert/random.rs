//! Random states and unitaries for randomized cross-checks.

use rand::Rng;
use rand_distr::StandardNormal;

use super::linalg::{c, real, CMatrix, CVector};
use super::operator::{LabeledOperator, PureState};
use super::registry::{SystemLabel, SystemRegistry};
use crate::error::{Error, Result};

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> num_complex::Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(re, im)
}

/// Haar-random `d×d` unitary: QR of a complex Ginibre matrix with the phases
/// of `R`'s diagonal folded back into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(d, d, |_, _| gaussian(rng));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        let diag = r[(j, j)];
        let phase = if diag.norm() > 0.0 {
            diag / diag.norm()
        } else {
            real(1.0)
        };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

pub fn random_vector<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CVector {
    let v = CVector::from_fn(d, |_, _| gaussian(rng));
    let n = v.norm();
    v.unscale(n)
}

pub fn random_pure_state<R: Rng + ?Sized>(
    labels: &[SystemLabel],
    registry: &SystemRegistry,
    rng: &mut R,
) -> Result<PureState> {
    let space = registry.space(labels)?;
    PureState::on_space(random_vector(space.dim(), rng), space)
}

pub fn random_unitary<R: Rng + ?Sized>(
    labels: &[SystemLabel],
    registry: &SystemRegistry,
    rng: &mut R,
) -> Result<LabeledOperator> {
    let space = registry.space(labels)?;
    LabeledOperator::on_space(haar_unitary(space.dim(), rng), space)
}

/// `Σ_i |i⟩_a|i⟩_b / √d` for two systems of equal dimension.
pub fn max_entangled(a: &SystemLabel, b: &SystemLabel, registry: &SystemRegistry) -> Result<PureState> {
    let da = registry.dim_of(a)?;
    let db = registry.dim_of(b)?;
    if da != db {
        return Err(Error::DimensionMismatch(format!(
            "maximally entangled state needs equal dimensions, got {a}:{da} and {b}:{db}"
        )));
    }
    let mut v = CVector::zeros(da * da);
    let amp = 1.0 / (da as f64).sqrt();
    for i in 0..da {
        v[i * da + i] = real(amp);
    }
    // (a, b) listed in this order; PureState::new reorders if b precedes a
    PureState::new(v, &[a.clone(), b.clone()], registry)
}
