//! The linear Holstein–Primakoff model.
//!
//! The real state is ordered `(X_c, P_c, S_x⁽¹⁾, S_y⁽¹⁾, …, S_x⁽ᴹ⁾, S_y⁽ᴹ⁾)` with
//! sub-ensembles in ascending detuning. The drift has only `O(M)` non-zeros, so
//! products with it are done structurally; [`DriftModel::drift_matrix`] builds
//! the dense form for eigen-analysis and tests.
//!
//! The drift is complex-linear in `u = (X_c + iP_c, S_x⁽ᵐ⁾ - iS_y⁽ᵐ⁾)`: with
//! `u̇ = K u`, the real spectrum is `eig K ∪ conj(eig K)`. Covariances whose
//! pseudo-covariance `⟨δu δuᵀ⟩` vanishes are captured by the Hermitian matrix
//! `H = T γ Tᴴ`, which obeys `Ḣ = KH + HKᴴ + N_c`.

use std::f64::consts::SQRT_2;

use nalgebra::{DMatrix, DVector, Matrix6, Vector6};
use num_complex::Complex64;

use crate::broadening::SubEnsembleGrid;
use crate::error::{Error, Result};

/// Real quadrature means, length `2M + 2`.
pub type StateVector = DVector<f64>;

/// Symmetrized covariance `γ_kl = 2 Re⟨δy_k δy_l⟩`, so `Var(y_k) = γ_kk / 2`.
pub type CovarianceMatrix = DMatrix<f64>;

/// Rates and couplings, all in one angular-frequency unit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    pub kappa: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    pub gamma_perp: f64,
    pub g_ens: f64,
    pub delta_cs: f64,
}

impl SystemParams {
    pub fn new(
        kappa1: f64,
        kappa2: f64,
        gamma_perp: f64,
        g_ens: f64,
        delta_cs: f64,
    ) -> Result<Self> {
        let params = Self {
            kappa: kappa1 + kappa2,
            kappa1,
            kappa2,
            gamma_perp,
            g_ens,
            delta_cs,
        };
        params.validate()?;
        Ok(params)
    }

    /// Symmetric cavity, `κ1 = κ2 = κ/2`, on resonance.
    pub fn symmetric(kappa: f64, gamma_perp: f64, g_ens: f64) -> Result<Self> {
        Self::new(0.5 * kappa, 0.5 * kappa, gamma_perp, g_ens, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.kappa, self.kappa1, self.kappa2, self.gamma_perp, self.g_ens, self.delta_cs]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidParameter(format!("non-finite parameter in {self:?}")));
        }
        for (name, value) in [
            ("kappa1", self.kappa1),
            ("kappa2", self.kappa2),
            ("gamma_perp", self.gamma_perp),
            ("g_ens", self.g_ens),
        ] {
            if value < 0.0 {
                return Err(Error::InvalidParameter(format!("{name} must be non-negative (got {value})")));
            }
        }
        if self.kappa <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "cavity decay rate must be positive (got {})",
                self.kappa
            )));
        }
        if (self.kappa - self.kappa1 - self.kappa2).abs() > 1e-12 * self.kappa {
            return Err(Error::InvalidParameter(format!(
                "kappa = {} differs from kappa1 + kappa2 = {}",
                self.kappa,
                self.kappa1 + self.kappa2
            )));
        }
        Ok(())
    }
}

/// Checks that an inversion sign is exactly ±1.
pub fn check_inversion(p: f64) -> Result<f64> {
    if p == 1.0 || p == -1.0 {
        Ok(p)
    } else {
        Err(Error::InvalidParameter(format!(
            "inversion sign must be +1 (inverted) or -1 (ground state), got {p}"
        )))
    }
}

/// Drift and noise of the linearized cavity–ensemble system.
#[derive(Debug, Clone)]
pub struct DriftModel {
    params: SystemParams,
    grid: SubEnsembleGrid,
    p: f64,
    /// `-g_m/√2`, the spin-to-field coupling.
    field_coupling: Vec<f64>,
    /// `-√2 g_m S_z⁽ᵐ⁾`, the field-to-spin coupling.
    spin_coupling: Vec<f64>,
    detuning: Vec<f64>,
    spins: Vec<f64>,
}

/// Builds the drift model for inversion sign `p` (`S_z⁽ᵐ⁾ = p N_m`).
pub fn build_drift_matrix(params: &SystemParams, grid: &SubEnsembleGrid, p: f64) -> Result<DriftModel> {
    params.validate()?;
    check_inversion(p)?;
    if grid.is_empty() {
        return Err(Error::InvalidParameter("sub-ensemble grid is empty".into()));
    }
    let entries = grid.entries();
    Ok(DriftModel {
        params: *params,
        grid: grid.clone(),
        p,
        field_coupling: entries.iter().map(|e| -e.coupling / SQRT_2).collect(),
        spin_coupling: entries.iter().map(|e| -SQRT_2 * e.coupling * p * e.spins).collect(),
        detuning: entries.iter().map(|e| e.detuning).collect(),
        spins: entries.iter().map(|e| e.spins).collect(),
    })
}

impl DriftModel {
    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn grid(&self) -> &SubEnsembleGrid {
        &self.grid
    }

    pub fn inversion(&self) -> f64 {
        self.p
    }

    /// Number of sub-ensembles `M`.
    pub fn sub_ensembles(&self) -> usize {
        self.detuning.len()
    }

    /// Real dimension `2M + 2`.
    pub fn dim(&self) -> usize {
        2 * self.sub_ensembles() + 2
    }

    pub fn is_finite(&self) -> bool {
        self.field_coupling
            .iter()
            .chain(&self.spin_coupling)
            .chain(&self.detuning)
            .all(|v| v.is_finite())
    }

    /// Dense drift matrix.
    pub fn drift_matrix(&self) -> DMatrix<f64> {
        let n = self.dim();
        let SystemParams { kappa, delta_cs, gamma_perp, .. } = self.params;
        let mut m = DMatrix::zeros(n, n);
        m[(0, 0)] = -kappa;
        m[(0, 1)] = delta_cs;
        m[(1, 0)] = -delta_cs;
        m[(1, 1)] = -kappa;
        for k in 0..self.sub_ensembles() {
            let (sx, sy) = (2 + 2 * k, 3 + 2 * k);
            let b = self.field_coupling[k];
            let c = self.spin_coupling[k];
            m[(0, sy)] = b;
            m[(1, sx)] = b;
            m[(sx, 1)] = c;
            m[(sy, 0)] = c;
            m[(sx, sx)] = -gamma_perp;
            m[(sx, sy)] = -self.detuning[k];
            m[(sy, sx)] = self.detuning[k];
            m[(sy, sy)] = -gamma_perp;
        }
        m
    }

    /// Diagonal of the noise matrix: `2κ` on the field, `4γ⊥N_m` on each spin quadrature.
    pub fn noise_diagonal(&self) -> DVector<f64> {
        let mut d = DVector::zeros(self.dim());
        d[0] = 2.0 * self.params.kappa;
        d[1] = 2.0 * self.params.kappa;
        for (k, &n) in self.spins.iter().enumerate() {
            let v = 4.0 * self.params.gamma_perp * n;
            d[2 + 2 * k] = v;
            d[3 + 2 * k] = v;
        }
        d
    }

    pub fn noise_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&self.noise_diagonal())
    }

    /// `Σ diag M = -2κ - 2Mγ⊥`.
    pub fn trace(&self) -> f64 {
        -2.0 * self.params.kappa - 2.0 * self.sub_ensembles() as f64 * self.params.gamma_perp
    }

    /// `out = M y` for a single real vector.
    pub fn apply_into(&self, y: &[f64], out: &mut [f64]) {
        debug_assert_eq!(y.len(), self.dim());
        debug_assert_eq!(out.len(), self.dim());
        let SystemParams { kappa, delta_cs, gamma_perp, .. } = self.params;
        let (x, p) = (y[0], y[1]);
        let mut dx = -kappa * x + delta_cs * p;
        let mut dp = -delta_cs * x - kappa * p;
        for k in 0..self.sub_ensembles() {
            let (sx, sy) = (y[2 + 2 * k], y[3 + 2 * k]);
            let b = self.field_coupling[k];
            let c = self.spin_coupling[k];
            let d = self.detuning[k];
            dx += b * sy;
            dp += b * sx;
            out[2 + 2 * k] = c * p - gamma_perp * sx - d * sy;
            out[3 + 2 * k] = c * x + d * sx - gamma_perp * sy;
        }
        out[0] = dx;
        out[1] = dp;
    }

    pub fn apply(&self, y: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.dim());
        self.apply_into(y.as_slice(), out.as_mut_slice());
        out
    }

    /// `M γ`, column by column.
    pub fn left_multiply(&self, gamma: &DMatrix<f64>) -> DMatrix<f64> {
        let n = self.dim();
        assert_eq!(gamma.nrows(), n);
        let mut out = DMatrix::zeros(n, gamma.ncols());
        for (src, dst) in gamma.as_slice().chunks_exact(n).zip(out.as_mut_slice().chunks_exact_mut(n)) {
            self.apply_into(src, dst);
        }
        out
    }

    /// Diagonal entries of the complex drift `K`, field first.
    pub fn complex_diagonal(&self) -> Vec<Complex64> {
        let mut d = Vec::with_capacity(self.sub_ensembles() + 1);
        d.push(Complex64::new(-self.params.kappa, -self.params.delta_cs));
        d.extend(self.detuning.iter().map(|&det| Complex64::new(-self.params.gamma_perp, -det)));
        d
    }

    /// Row 0 of `K` beyond the diagonal: `K_0m = -i g_m/√2`.
    pub fn complex_field_row(&self) -> Vec<Complex64> {
        self.field_coupling.iter().map(|&b| Complex64::new(0.0, b)).collect()
    }

    /// Column 0 of `K` below the diagonal: `K_m0 = i√2 g_m S_z⁽ᵐ⁾`.
    pub fn complex_spin_column(&self) -> Vec<Complex64> {
        self.spin_coupling.iter().map(|&c| Complex64::new(0.0, -c)).collect()
    }

    /// Dense complex drift `K` of size `M + 1`.
    pub fn complex_drift(&self) -> DMatrix<Complex64> {
        let n = self.sub_ensembles() + 1;
        let mut k = DMatrix::from_diagonal(&DVector::from_vec(self.complex_diagonal()));
        for (m, (r, c)) in self.complex_field_row().into_iter().zip(self.complex_spin_column()).enumerate() {
            k[(0, m + 1)] = r;
            k[(m + 1, 0)] = c;
        }
        debug_assert_eq!(k.nrows(), n);
        k
    }

    /// Diagonal of the reduced noise `N_c`: `4κ` on the field, `8γ⊥N_m` on the spins.
    pub fn complex_noise_diagonal(&self) -> Vec<f64> {
        let mut d = Vec::with_capacity(self.sub_ensembles() + 1);
        d.push(4.0 * self.params.kappa);
        d.extend(self.spins.iter().map(|&n| 8.0 * self.params.gamma_perp * n));
        d
    }
}

/// Complex coordinates `u = (X_c + iP_c, S_x⁽ᵐ⁾ - iS_y⁽ᵐ⁾)` of a real state.
pub fn to_complex_state(y: &DVector<f64>) -> DVector<Complex64> {
    let n = y.len() / 2;
    DVector::from_fn(n, |k, _| {
        let (a, b) = (y[2 * k], y[2 * k + 1]);
        if k == 0 {
            Complex64::new(a, b)
        } else {
            Complex64::new(a, -b)
        }
    })
}

pub fn from_complex_state(u: &DVector<Complex64>) -> DVector<f64> {
    DVector::from_fn(2 * u.len(), |i, _| {
        let z = u[i / 2];
        match (i % 2, i / 2) {
            (0, _) => z.re,
            (_, 0) => z.im,
            _ => -z.im,
        }
    })
}

/// Sign relating the second real coordinate of block `k` to `Im u_k`.
fn quadrature_sign(k: usize) -> f64 {
    if k == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `H = T γ Tᴴ`, the Hermitian covariance of `u`.
pub fn to_hermitian_covariance(gamma: &DMatrix<f64>) -> DMatrix<Complex64> {
    let n = gamma.nrows() / 2;
    DMatrix::from_fn(n, n, |k, l| {
        let (ak, bk, al, bl) = (2 * k, 2 * k + 1, 2 * l, 2 * l + 1);
        let s = quadrature_sign(k) * quadrature_sign(l);
        let re = gamma[(ak, al)] + s * gamma[(bk, bl)];
        let im = quadrature_sign(k) * gamma[(bk, al)] - quadrature_sign(l) * gamma[(ak, bl)];
        Complex64::new(re, im)
    })
}

/// Inverse of [`to_hermitian_covariance`] for covariances with vanishing
/// pseudo-covariance.
pub fn from_hermitian_covariance(h: &DMatrix<Complex64>) -> DMatrix<f64> {
    let n = h.nrows();
    let mut gamma = DMatrix::zeros(2 * n, 2 * n);
    for l in 0..n {
        for k in 0..n {
            let v = h[(k, l)];
            let (sk, sl) = (quadrature_sign(k), quadrature_sign(l));
            let (ak, bk, al, bl) = (2 * k, 2 * k + 1, 2 * l, 2 * l + 1);
            gamma[(ak, al)] = 0.5 * v.re;
            gamma[(bk, bl)] = 0.5 * v.re * sk * sl;
            gamma[(bk, al)] = 0.5 * sk * v.im;
            gamma[(ak, bl)] = -0.5 * sl * v.im;
        }
    }
    gamma
}

/// Largest entry of the pseudo-covariance `T γ Tᵀ`, relative to the largest
/// entry of `γ`. Zero means the reduced Hermitian form is exact.
pub fn pseudo_covariance_defect(gamma: &DMatrix<f64>) -> f64 {
    let n = gamma.nrows() / 2;
    let scale = gamma.amax().max(f64::MIN_POSITIVE);
    let mut worst: f64 = 0.0;
    for k in 0..n {
        for l in 0..n {
            let (ak, bk, al, bl) = (2 * k, 2 * k + 1, 2 * l, 2 * l + 1);
            let s = quadrature_sign(k) * quadrature_sign(l);
            let re = gamma[(ak, al)] - s * gamma[(bk, bl)];
            let im = quadrature_sign(k) * gamma[(bk, al)] + quadrature_sign(l) * gamma[(ak, bl)];
            worst = worst.max(re.abs()).max(im.abs());
        }
    }
    worst / scale
}

/// The six second moments of the resonant homogeneous system, `ẋ = Q x + r`, with
/// `x = (⟨δX_c²⟩, ⟨δP_c²⟩, ⟨δS_x²⟩, ⟨δS_y²⟩, ⟨δS_x δP_c⟩, ⟨δS_y δX_c⟩)` and the
/// single-spin coupling `ḡ = g_ens/√N`. Spins are fully inverted.
pub fn build_homogeneous_q(params: &SystemParams, n: f64) -> Result<(Matrix6<f64>, Vector6<f64>)> {
    params.validate()?;
    if params.delta_cs != 0.0 {
        return Err(Error::InvalidParameter(format!(
            "the six-moment system is derived on resonance (got delta_cs = {})",
            params.delta_cs
        )));
    }
    if !(n.is_finite() && n > 0.0) {
        return Err(Error::InvalidParameter(format!("spin number must be positive (got {n})")));
    }
    let SystemParams { kappa, gamma_perp, .. } = *params;
    let g = params.g_ens / n.sqrt();
    let a = SQRT_2 * g;
    let an = SQRT_2 * g * n;
    let h = g / SQRT_2;
    let kg = -(kappa + gamma_perp);
    #[rustfmt::skip]
    let q = Matrix6::new(
        -2.0 * kappa, 0.0,          0.0,               0.0,               0.0,       -a,
        0.0,          -2.0 * kappa, 0.0,               0.0,               -a,        0.0,
        0.0,          0.0,          -2.0 * gamma_perp, 0.0,               -2.0 * an, 0.0,
        0.0,          0.0,          0.0,               -2.0 * gamma_perp, 0.0,       -2.0 * an,
        0.0,          -an,          -h,                0.0,               kg,        0.0,
        -an,          0.0,          0.0,               -h,                0.0,       kg,
    );
    let r = Vector6::new(kappa, kappa, 2.0 * gamma_perp * n, 2.0 * gamma_perp * n, 0.0, 0.0);
    Ok((q, r))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialKind {
    /// Field displaced to `⟨a_c⟩ = α`, spins unpolarized in-plane.
    FieldKick,
    /// Spins tilted by `θ`: `S_x⁽ᵐ⁾ = θ N_m`.
    TiltedSpin,
    Vacuum,
}

/// Mean and covariance of the coherent initial states. The covariance is the
/// minimum-uncertainty one in every case: `Var(X_c) = Var(P_c) = ½`,
/// `Var(S_x⁽ᵐ⁾) = Var(S_y⁽ᵐ⁾) = N_m`.
pub fn initial_state(
    kind: InitialKind,
    grid: &SubEnsembleGrid,
    alpha: f64,
    theta: f64,
) -> Result<(StateVector, CovarianceMatrix)> {
    if !(alpha.is_finite() && theta.is_finite()) {
        return Err(Error::InvalidParameter("initial amplitudes must be finite".into()));
    }
    let m = grid.len();
    let mut y = DVector::zeros(2 * m + 2);
    match kind {
        InitialKind::FieldKick => y[0] = SQRT_2 * alpha,
        InitialKind::TiltedSpin => {
            for (k, e) in grid.entries().iter().enumerate() {
                y[2 + 2 * k] = theta * e.spins;
            }
        }
        InitialKind::Vacuum => {}
    }
    let mut diag = DVector::from_element(2 * m + 2, 1.0);
    for (k, e) in grid.entries().iter().enumerate() {
        diag[2 + 2 * k] = 2.0 * e.spins;
        diag[3 + 2 * k] = 2.0 * e.spins;
    }
    Ok((y, DMatrix::from_diagonal(&diag)))
}
