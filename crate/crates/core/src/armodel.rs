//! Autoregressive algebra: innovation variance, Yule-Walker autocovariance
//! solving and extension, the Levinson-Durbin inverse map, and validity
//! checks (strict stability of AR coefficients, positive-definite Toeplitz
//! autocovariances).
//!
//! The AR model is `X_t = sum_{i=1}^p phi_i X_{t-i} + eta Z_t` with white
//! unit-variance innovations, and the Yule-Walker relations read
//! `gamma_m = sum_k phi_k gamma_{m-k} + eta^2 delta_m`.

use crate::spectra::{ar_denominator_sq, integrate_periodic};
use crate::{Error, Result};

/// Strictly-inside-the-unit-circle is enforced with this margin so the
/// spectral integrals driven by `1/|1-Phi|^2` stay bounded.
pub const STABILITY_MARGIN: f64 = 1e-9;

/// Stationary AR(p) input description: coefficients, innovation variance,
/// and the stationary power it was calibrated to.
#[derive(Debug, Clone, PartialEq)]
pub struct ArParams {
    phi: Vec<f64>,
    eta2: f64,
    p_x: f64,
}

impl ArParams {
    /// Builds the AR parameters for given coefficients, choosing the
    /// innovation variance so the stationary power equals `p_x`.
    pub fn from_phi(phi: &[f64], p_x: f64, quad_points: usize) -> Result<Self> {
        let eta2 = eta_squared(phi, p_x, quad_points)?;
        Ok(ArParams { phi: phi.to_vec(), eta2, p_x })
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn eta2(&self) -> f64 {
        self.eta2
    }

    pub fn p_x(&self) -> f64 {
        self.p_x
    }

    pub fn order(&self) -> usize {
        self.phi.len()
    }
}

/// Autocovariances `gamma_0..gamma_m` of a stationary process, with the
/// symmetric extension `gamma_{-k} = gamma_k` implied.
#[derive(Debug, Clone, PartialEq)]
pub struct AutocovVector {
    gamma: Vec<f64>,
}

impl AutocovVector {
    /// Validates positive definiteness of the Toeplitz matrix before
    /// accepting the sequence.
    pub fn new(gamma: Vec<f64>) -> Result<Self> {
        match validate_gamma(&gamma) {
            Validity::Valid => Ok(AutocovVector { gamma }),
            Validity::NotPositiveDefinite { minor } => {
                Err(Error::NotPositiveDefinite { minor })
            }
            Validity::Unstable { .. } => unreachable!(),
        }
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    /// `gamma_k` with the symmetric extension for negative lags; zero past
    /// the stored range is not assumed -- callers must stay in range.
    pub fn at(&self, lag: isize) -> f64 {
        self.gamma[lag.unsigned_abs()]
    }

    pub fn max_lag(&self) -> usize {
        self.gamma.len() - 1
    }
}

/// Outcome of a parameter validity check.
#[derive(Debug, Clone, PartialEq)]
pub enum Validity {
    Valid,
    /// Stability test failed at the given step-down stage, where the
    /// reflection coefficient left (-1, 1).
    Unstable { stage: usize, reflection: f64 },
    /// First failing leading principal minor (1-based size).
    NotPositiveDefinite { minor: usize },
}

impl Validity {
    pub fn is_valid(&self) -> bool {
        matches!(self, Validity::Valid)
    }
}

/// Checks that all roots of `z^p - sum_i phi_i z^{p-i}` have modulus below
/// `1 - STABILITY_MARGIN`, via the Schur-Cohn step-down recursion applied
/// to the radially scaled polynomial.
pub fn validate_phi(phi: &[f64]) -> Validity {
    if phi.iter().any(|c| !c.is_finite()) {
        return Validity::Unstable { stage: 0, reflection: f64::NAN };
    }
    let r = 1.0 - STABILITY_MARGIN;
    // Roots of the scaled polynomial sit at z/r, so Schur stability of the
    // scaled coefficients is exactly max|root| < r.
    let mut a: Vec<f64> = phi
        .iter()
        .enumerate()
        .map(|(i, &c)| -c / r.powi(i as i32 + 1))
        .collect();
    let mut m = a.len();
    while m > 0 {
        let k = a[m - 1];
        if k.abs() >= 1.0 {
            return Validity::Unstable { stage: m, reflection: k };
        }
        let denom = 1.0 - k * k;
        let prev: Vec<f64> = (0..m - 1)
            .map(|j| (a[j] - k * a[m - 2 - j]) / denom)
            .collect();
        a = prev;
        m -= 1;
    }
    Validity::Valid
}

/// Positive definiteness of the Toeplitz matrix `{gamma_|i-j|}` through its
/// Cholesky pivots.
pub fn validate_gamma(gamma: &[f64]) -> Validity {
    let n = gamma.len();
    if n == 0 || gamma.iter().any(|g| !g.is_finite()) {
        return Validity::NotPositiveDefinite { minor: 1 };
    }
    let mut l = vec![vec![0.0_f64; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = gamma[i - j];
            for (lik, ljk) in l[i][..j].iter().zip(&l[j][..j]) {
                sum -= lik * ljk;
            }
            if i == j {
                if sum <= 0.0 {
                    return Validity::NotPositiveDefinite { minor: i + 1 };
                }
                l[i][j] = sum.sqrt();
            } else {
                l[i][j] = sum / l[j][j];
            }
        }
    }
    Validity::Valid
}

pub(crate) fn require_stable(phi: &[f64]) -> Result<()> {
    match validate_phi(phi) {
        Validity::Valid => Ok(()),
        Validity::Unstable { stage, reflection } => Err(Error::UnstableAr(format!(
            "step-down stage {stage} has reflection coefficient {reflection}"
        ))),
        Validity::NotPositiveDefinite { .. } => unreachable!(),
    }
}

/// Innovation variance giving stationary power `p_x`:
/// `eta^2 = p_x / [ (1/2pi) int dnu / |1 - Phi(nu)|^2 ]`.
pub fn eta_squared(phi: &[f64], p_x: f64, quad_points: usize) -> Result<f64> {
    require_stable(phi)?;
    if p_x <= 0.0 || !p_x.is_finite() {
        return Err(Error::InvalidInput(format!("power must be positive, got {p_x}")));
    }
    let gain = integrate_periodic(|nu| 1.0 / ar_denominator_sq(phi, nu), quad_points)?;
    Ok(p_x / gain)
}

/// Autocovariances `gamma_0..gamma_{m_max}` of the AR process: the linear
/// Yule-Walker system for lags up to p, then the recursive extension
/// `gamma_m = sum_k phi_k gamma_{m-k}` beyond.
pub fn autocov_from_ar(params: &ArParams, m_max: usize) -> Result<AutocovVector> {
    let phi = params.phi();
    let p = phi.len();
    let mut gamma = vec![0.0_f64; m_max.max(p) + 1];

    if p == 0 {
        gamma[0] = params.eta2();
    } else {
        // Row m: gamma_m - sum_k phi_k gamma_{|m-k|} = eta^2 delta_m.
        let n = p + 1;
        let mut a = vec![vec![0.0_f64; n]; n];
        let mut b = vec![0.0_f64; n];
        b[0] = params.eta2();
        for (m, row) in a.iter_mut().enumerate() {
            row[m] += 1.0;
            for (k, &c) in phi.iter().enumerate() {
                let lag = (m as isize - (k as isize + 1)).unsigned_abs();
                row[lag] -= c;
            }
        }
        let head = solve_dense(a, b)?;
        gamma[..n].copy_from_slice(&head);
        for m in p + 1..=m_max.max(p) {
            gamma[m] = phi.iter().enumerate().map(|(k, &c)| c * gamma[m - k - 1]).sum();
        }
    }
    gamma.truncate(m_max + 1);
    AutocovVector::new(gamma)
}

/// Levinson-Durbin recursion: recovers `(phi, eta2)` from autocovariances,
/// the inverse of [`autocov_from_ar`].
pub fn ar_from_autocov(gamma: &AutocovVector) -> Result<ArParams> {
    let g = gamma.gamma();
    let p = g.len() - 1;
    if g[0] <= 0.0 {
        return Err(Error::NotPositiveDefinite { minor: 1 });
    }
    let mut phi: Vec<f64> = Vec::with_capacity(p);
    let mut err = g[0];
    for m in 1..=p {
        let mut acc = g[m];
        for (j, &c) in phi.iter().enumerate() {
            acc -= c * g[m - 1 - j];
        }
        let k = acc / err;
        if k.abs() >= 1.0 {
            return Err(Error::NotPositiveDefinite { minor: m + 1 });
        }
        let half = phi.clone();
        for j in 0..m - 1 {
            phi[j] = half[j] - k * half[m - 2 - j];
        }
        phi.push(k);
        err *= 1.0 - k * k;
    }
    Ok(ArParams { phi, eta2: err, p_x: g[0] })
}

/// Gaussian elimination with partial pivoting; systems here are tiny
/// (order p+1 with p <= 8 in every scenario of interest).
fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        if a[pivot_row][col].abs() < 1e-14 {
            return Err(Error::InvalidInput("singular Yule-Walker system".into()));
        }
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);
        let pivot = a[col].clone();
        for row in col + 1..n {
            let factor = a[row][col] / pivot[col];
            for (k, &pk) in pivot.iter().enumerate().skip(col) {
                a[row][k] -= factor * pk;
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0_f64; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in row + 1..n {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn yw_residual(params: &ArParams, gamma: &AutocovVector) -> f64 {
        let mut worst = 0.0_f64;
        for (m, &gm) in gamma.gamma().iter().enumerate() {
            let mut acc = 0.0;
            for (k, &c) in params.phi().iter().enumerate() {
                acc += c * gamma.at(m as isize - k as isize - 1);
            }
            if m == 0 {
                acc += params.eta2();
            }
            worst = worst.max((gm - acc).abs());
        }
        worst
    }

    #[test]
    fn stability_simple_cases() {
        assert!(validate_phi(&[]).is_valid());
        assert!(validate_phi(&[0.5]).is_valid());
        assert!(!validate_phi(&[1.2]).is_valid());
        assert!(!validate_phi(&[1.0]).is_valid());
        // AR(2) stability triangle boundaries.
        assert!(validate_phi(&[0.5, -0.3]).is_valid());
        assert!(validate_phi(&[1.0, -0.5]).is_valid());
        assert!(!validate_phi(&[0.4, 0.65]).is_valid());
        assert!(!validate_phi(&[1.9, -0.9]).is_valid());
    }

    #[test]
    fn gamma_validity() {
        assert!(validate_gamma(&[1.0]).is_valid());
        assert!(validate_gamma(&[1.0, 0.5]).is_valid());
        assert_eq!(
            validate_gamma(&[1.0, 1.1]),
            Validity::NotPositiveDefinite { minor: 2 }
        );
        assert_eq!(
            validate_gamma(&[-1.0, 0.0]),
            Validity::NotPositiveDefinite { minor: 1 }
        );
    }

    #[test]
    fn eta_squared_white_process() {
        let e = eta_squared(&[], 2.5, 256).unwrap();
        assert!((e - 2.5).abs() < 1e-12);
    }

    #[test]
    fn eta_squared_ar1_closed_form() {
        // eta^2 = P_X (1 - phi1^2).
        for phi1 in [0.2, 0.5, -0.8] {
            let e = eta_squared(&[phi1], 1.0, 4096).unwrap();
            assert!((e - (1.0 - phi1 * phi1)).abs() < 1e-10, "phi1={phi1}");
        }
    }

    #[test]
    fn eta_squared_ar2_matches_yule_walker_solve() {
        // Independent route: solve the 3x3 Yule-Walker system with unit
        // innovation variance and invert the stationary power.
        let phi = [0.5, -0.3];
        let p_x = 1.0;
        let unit = ArParams { phi: phi.to_vec(), eta2: 1.0, p_x: f64::NAN };
        let gamma_unit = autocov_from_ar(&unit, 2).unwrap();
        let oracle = p_x / gamma_unit.gamma()[0];
        let quad = eta_squared(&phi, p_x, 4096).unwrap();
        assert!((quad - oracle).abs() < 1e-10, "{quad} vs {oracle}");
    }

    #[test]
    fn eta_squared_rejects_unstable() {
        assert!(eta_squared(&[1.01], 1.0, 256).is_err());
    }

    #[test]
    fn autocov_white_process() {
        let params = ArParams::from_phi(&[], 1.0, 256).unwrap();
        let gamma = autocov_from_ar(&params, 3).unwrap();
        assert_eq!(gamma.gamma().len(), 4);
        assert!((gamma.gamma()[0] - 1.0).abs() < 1e-12);
        for &g in &gamma.gamma()[1..] {
            assert!(g.abs() < 1e-12);
        }
    }

    #[test]
    fn autocov_ar1_closed_form() {
        // gamma_m = P_X phi1^m.
        let params = ArParams::from_phi(&[0.5], 1.0, 4096).unwrap();
        let gamma = autocov_from_ar(&params, 5).unwrap();
        for (m, &g) in gamma.gamma().iter().enumerate() {
            assert!((g - 0.5_f64.powi(m as i32)).abs() < 1e-9, "lag {m}: {g}");
        }
        assert!(yw_residual(&params, &gamma) < 1e-10);
    }

    #[test]
    fn autocov_satisfies_defining_equations() {
        let params = ArParams::from_phi(&[0.9, -0.5, 0.1], 2.0, 4096).unwrap();
        let gamma = autocov_from_ar(&params, 8).unwrap();
        assert!(yw_residual(&params, &gamma) < 1e-10);
        assert!((gamma.gamma()[0] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn levinson_trivial_and_one_step() {
        let white = ar_from_autocov(&AutocovVector::new(vec![1.0, 0.0, 0.0]).unwrap()).unwrap();
        assert_eq!(white.phi(), &[0.0, 0.0]);
        assert!((white.eta2() - 1.0).abs() < 1e-15);

        // One hand-computed step: gamma = (1, 0.5) -> phi1 = 0.5, eta2 = 0.75.
        let one = ar_from_autocov(&AutocovVector::new(vec![1.0, 0.5]).unwrap()).unwrap();
        assert!((one.phi()[0] - 0.5).abs() < 1e-15);
        assert!((one.eta2() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn levinson_round_trip() {
        let params = ArParams::from_phi(&[0.7, -0.2], 1.5, 4096).unwrap();
        let gamma = autocov_from_ar(&params, 2).unwrap();
        let back = ar_from_autocov(&gamma).unwrap();
        for (a, b) in params.phi().iter().zip(back.phi()) {
            assert!((a - b).abs() < 1e-9);
        }
        assert!((params.eta2() - back.eta2()).abs() < 1e-9);
        let forward = autocov_from_ar(&back, 2).unwrap();
        for (a, b) in gamma.gamma().iter().zip(forward.gamma()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn levinson_rejects_non_pd_with_minor_index() {
        let err = ar_from_autocov(&AutocovVector { gamma: vec![1.0, 1.1] }).unwrap_err();
        match err {
            Error::NotPositiveDefinite { minor } => assert_eq!(minor, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn wiener_khinchin_consistency() {
        // S_X built from (phi, eta2) integrates back to gamma_0 = P_X.
        use crate::spectra::{integrate_periodic, SpectralDensities, TapVector};
        let params = ArParams::from_phi(&[0.6, -0.25], 1.0, 4096).unwrap();
        let h = TapVector::new(vec![1.0]).unwrap();
        let sd = SpectralDensities::new(&h, 1.0, params.eta2(), params.phi()).unwrap();
        let power = integrate_periodic(|nu| sd.s_x(nu), 4096).unwrap();
        assert!((power - 1.0).abs() < 1e-8, "{power}");
    }
}
