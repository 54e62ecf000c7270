//! Missing-data multivariate-Gaussian machinery.
//!
//! A sample is a `B x T` matrix (spectral bands x within-year time points)
//! with a per-cell missingness mask. For covariance algebra the matrix is
//! flattened **in column order**: flat index `t * B + b`, i.e. time-major
//! blocks of `B` band values. Kronecker-structured covariances index-match
//! this layout: entry `(t*B+b, t'*B+b')` is `spectral[b,b'] * temporal[t,t']`.
//!
//! The three statistics computed here per (sample, Gaussian) pair are
//! - the conditional moments of the missing entries given the observed ones,
//! - the log-density of the observed sub-vector under the marginal normal,
//! - the expected Gaussian cost: `log|Σ|` plus the conditional expectation of
//!   the squared Mahalanobis distance given the observed entries, which is
//!   the per-year building block of the segmentation objective.
//!
//! All covariance factorizations add a small diagonal jitter
//! (`jitter_scale x mean diagonal`, default `1e-8`) before the Cholesky; set
//! [`GaussianSpec::with_jitter_scale`] to `0` for exact-formula behavior on
//! well-conditioned inputs.

use crate::linalg::{Cholesky, Mat};
use crate::num::{fp, Scalar};
use crate::Error;

/// Default diagonal jitter scale applied before every factorization.
pub const DEFAULT_JITTER_SCALE: f64 = 1e-8;

/// One year of `B x T` observations with a per-cell missingness mask.
///
/// Masked cells store the value `0`; their content never influences any
/// computation and the canonical zero keeps serialized forms reproducible.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectroTemporalSample<S> {
    bands: usize,
    times: usize,
    values: Vec<S>,
    mask: Vec<bool>,
}

impl<S: Scalar> SpectroTemporalSample<S> {
    /// Flat index of cell `(band, time)` under the column-order layout.
    #[inline]
    pub fn flat_index(bands: usize, band: usize, time: usize) -> usize {
        time * bands + band
    }

    pub fn new(bands: usize, times: usize, values: Vec<S>, mask: Vec<bool>) -> Result<Self, Error> {
        let n = bands * times;
        if values.len() != n {
            return Err(Error::DimensionMismatch {
                what: "sample values length".into(),
                expected: n,
                got: values.len(),
            });
        }
        if mask.len() != n {
            return Err(Error::DimensionMismatch {
                what: "sample mask length".into(),
                expected: n,
                got: mask.len(),
            });
        }
        let mut values = values;
        for (v, &m) in values.iter_mut().zip(&mask) {
            if m {
                *v = S::zero();
            }
        }
        Ok(SpectroTemporalSample { bands, times, values, mask })
    }

    pub fn fully_observed(bands: usize, times: usize, values: Vec<S>) -> Result<Self, Error> {
        let n = bands * times;
        Self::new(bands, times, values, vec![false; n])
    }

    pub fn fully_missing(bands: usize, times: usize) -> Self {
        let n = bands * times;
        SpectroTemporalSample {
            bands,
            times,
            values: vec![S::zero(); n],
            mask: vec![true; n],
        }
    }

    pub fn bands(&self) -> usize {
        self.bands
    }

    pub fn times(&self) -> usize {
        self.times
    }

    /// Flattened dimension `B * T`.
    pub fn dim(&self) -> usize {
        self.bands * self.times
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn value(&self, band: usize, time: usize) -> S {
        self.values[Self::flat_index(self.bands, band, time)]
    }

    pub fn is_missing(&self, band: usize, time: usize) -> bool {
        self.mask[Self::flat_index(self.bands, band, time)]
    }

    pub fn n_missing(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn is_fully_missing(&self) -> bool {
        self.mask.iter().all(|&m| m)
    }

    pub fn is_fully_observed(&self) -> bool {
        self.mask.iter().all(|&m| !m)
    }

    pub fn missing_indices(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.mask[i]).collect()
    }

    pub fn observed_indices(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&i| !self.mask[i]).collect()
    }

    /// Ingestion mode that widens missingness: any masked band at a time
    /// point masks the whole time point across all bands.
    pub fn expand_mask_to_timesteps(&self) -> Self {
        let mut out = self.clone();
        for t in 0..self.times {
            let any = (0..self.bands).any(|b| self.is_missing(b, t));
            if any {
                for b in 0..self.bands {
                    let idx = Self::flat_index(self.bands, b, t);
                    out.mask[idx] = true;
                    out.values[idx] = S::zero();
                }
            }
        }
        out
    }
}

/// One pixel: `J` years of spectro-temporal samples.
#[derive(Clone, Debug, PartialEq)]
pub struct PixelSeries<S> {
    id: String,
    years: Vec<SpectroTemporalSample<S>>,
}

impl<S: Scalar> PixelSeries<S> {
    pub fn new(id: impl Into<String>, years: Vec<SpectroTemporalSample<S>>) -> Result<Self, Error> {
        let id = id.into();
        if years.is_empty() {
            return Err(Error::InvalidParameter {
                name: "years".into(),
                reason: format!("pixel {id} has no years"),
            });
        }
        let (b, t) = (years[0].bands(), years[0].times());
        for (j, y) in years.iter().enumerate() {
            if y.bands() != b || y.times() != t {
                return Err(Error::InvalidParameter {
                    name: "years".into(),
                    reason: format!(
                        "pixel {id} year {} has shape {}x{}, expected {}x{}",
                        j + 1,
                        y.bands(),
                        y.times(),
                        b,
                        t
                    ),
                });
            }
        }
        Ok(PixelSeries { id, years })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn years(&self) -> &[SpectroTemporalSample<S>] {
        &self.years
    }

    pub fn year(&self, i: usize) -> &SpectroTemporalSample<S> {
        &self.years[i]
    }

    /// `(B, T, J)` shape.
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.years[0].bands(), self.years[0].times(), self.years.len())
    }

    pub fn expand_mask_to_timesteps(&self) -> Self {
        PixelSeries {
            id: self.id.clone(),
            years: self.years.iter().map(|y| y.expand_mask_to_timesteps()).collect(),
        }
    }
}

/// Covariance structure of a [`GaussianSpec`].
#[derive(Clone, Debug)]
pub enum CovModel<S> {
    /// Explicit dense symmetric matrix.
    Dense(Mat<S>),
    /// Kronecker pair: `spectral` is `B x B`, `temporal` is `T x T`; the
    /// densified matrix follows the column-order sample layout.
    Kronecker { spectral: Mat<S>, temporal: Mat<S> },
}

impl<S: Scalar> CovModel<S> {
    pub fn dim(&self) -> usize {
        match self {
            CovModel::Dense(m) => m.rows(),
            CovModel::Kronecker { spectral, temporal } => spectral.rows() * temporal.rows(),
        }
    }

    fn validate(&self) -> Result<(), Error> {
        match self {
            CovModel::Dense(m) => {
                if !m.is_square() {
                    return Err(Error::DimensionMismatch {
                        what: "dense covariance columns".into(),
                        expected: m.rows(),
                        got: m.cols(),
                    });
                }
            }
            CovModel::Kronecker { spectral, temporal } => {
                if !spectral.is_square() {
                    return Err(Error::DimensionMismatch {
                        what: "spectral factor columns".into(),
                        expected: spectral.rows(),
                        got: spectral.cols(),
                    });
                }
                if !temporal.is_square() {
                    return Err(Error::DimensionMismatch {
                        what: "temporal factor columns".into(),
                        expected: temporal.rows(),
                        got: temporal.cols(),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Mean and covariance of a flattened `B x T` Gaussian, plus a model ridge
/// (`+ ridge * I`) and the numerical jitter policy.
#[derive(Clone, Debug)]
pub struct GaussianSpec<S> {
    mean: Vec<S>,
    cov: CovModel<S>,
    ridge: S,
    jitter_scale: S,
}

impl<S: Scalar> GaussianSpec<S> {
    pub fn new(mean: Vec<S>, cov: CovModel<S>) -> Result<Self, Error> {
        cov.validate()?;
        if mean.len() != cov.dim() {
            return Err(Error::DimensionMismatch {
                what: "mean length".into(),
                expected: cov.dim(),
                got: mean.len(),
            });
        }
        Ok(GaussianSpec {
            mean,
            cov,
            ridge: S::zero(),
            jitter_scale: fp(DEFAULT_JITTER_SCALE),
        })
    }

    /// Add a model ridge `ridge * I` to the covariance.
    pub fn with_ridge(mut self, ridge: S) -> Self {
        self.ridge = ridge;
        self
    }

    /// Override the numerical jitter scale (`0` disables jitter).
    pub fn with_jitter_scale(mut self, scale: S) -> Self {
        self.jitter_scale = scale;
        self
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[S] {
        &self.mean
    }

    pub fn cov(&self) -> &CovModel<S> {
        &self.cov
    }

    pub fn ridge(&self) -> S {
        self.ridge
    }

    pub fn jitter_scale(&self) -> S {
        self.jitter_scale
    }

    /// Covariance entry `(i, j)` including the model ridge.
    #[inline]
    pub fn cov_entry(&self, i: usize, j: usize) -> S {
        let base = match &self.cov {
            CovModel::Dense(m) => m[(i, j)],
            CovModel::Kronecker { spectral, temporal } => {
                let b = spectral.rows();
                spectral[(i % b, j % b)] * temporal[(i / b, j / b)]
            }
        };
        if i == j {
            base + self.ridge
        } else {
            base
        }
    }

    /// Dense covariance including the model ridge (no jitter).
    pub fn densify(&self) -> Mat<S> {
        let n = self.dim();
        let mut out = Mat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] = self.cov_entry(i, j);
            }
        }
        out
    }

    /// Sub-covariance on the given global index sets (ridge included on
    /// global-diagonal entries).
    pub fn sub_cov(&self, rows: &[usize], cols: &[usize]) -> Mat<S> {
        let mut out = Mat::zeros(rows.len(), cols.len());
        for (i, &ri) in rows.iter().enumerate() {
            for (j, &cj) in cols.iter().enumerate() {
                out[(i, j)] = self.cov_entry(ri, cj);
            }
        }
        out
    }

    fn chol_jittered(&self, mut m: Mat<S>) -> Result<Cholesky<S>, Error> {
        let n = m.rows();
        if n > 0 && self.jitter_scale > S::zero() {
            let mean_diag = (0..n).map(|i| m[(i, i)]).sum::<S>() / fp::<S>(n as f64);
            m.add_diag(self.jitter_scale * mean_diag);
        }
        m.cholesky()
    }

    /// Factorize the covariance restricted to the observed index set.
    pub fn chol_observed(&self, obs: &[usize]) -> Result<Cholesky<S>, Error> {
        self.chol_jittered(self.sub_cov(obs, obs))
    }

    /// Factorize the full covariance.
    pub fn chol_full(&self) -> Result<Cholesky<S>, Error> {
        self.chol_jittered(self.densify())
    }
}

/// Conditional moments of the missing entries given the observed entries.
#[derive(Clone, Debug)]
pub struct ConditionalMoments<S> {
    /// Observed entries copied through; missing entries replaced by their
    /// conditional expectation.
    pub imputed_mean: Vec<S>,
    /// Full-size conditional covariance, nonzero only on missing x missing
    /// index pairs.
    pub cond_var: Mat<S>,
}

fn check_dims<S: Scalar>(sample: &SpectroTemporalSample<S>, spec: &GaussianSpec<S>) -> Result<(), Error> {
    if sample.dim() != spec.dim() {
        return Err(Error::DimensionMismatch {
            what: "sample dimension vs Gaussian dimension".into(),
            expected: spec.dim(),
            got: sample.dim(),
        });
    }
    if let CovModel::Kronecker { spectral, .. } = spec.cov() {
        if spectral.rows() != sample.bands() {
            return Err(Error::DimensionMismatch {
                what: "sample bands vs spectral factor".into(),
                expected: spectral.rows(),
                got: sample.bands(),
            });
        }
    }
    Ok(())
}

/// Conditional mean/variance of the missing entries given the observed ones:
/// `mean_miss = μ_m + Σ_om' Σ_oo⁻¹ (x_o − μ_o)`,
/// `var = Σ_mm − Σ_om' Σ_oo⁻¹ Σ_om`.
///
/// With nothing missing the conditional variance is zero; with everything
/// missing the conditional law is the marginal `(μ, Σ)`.
pub fn conditional_moments<S: Scalar>(
    sample: &SpectroTemporalSample<S>,
    spec: &GaussianSpec<S>,
) -> Result<ConditionalMoments<S>, Error> {
    check_dims(sample, spec)?;
    let n = spec.dim();
    let miss = sample.missing_indices();
    if miss.is_empty() {
        return Ok(ConditionalMoments {
            imputed_mean: sample.values().to_vec(),
            cond_var: Mat::zeros(n, n),
        });
    }
    if miss.len() == n {
        return Ok(ConditionalMoments {
            imputed_mean: spec.mean().to_vec(),
            cond_var: spec.densify(),
        });
    }
    let obs = sample.observed_indices();
    let chol_oo = spec.chol_observed(&obs)?;
    let resid: Vec<S> = obs
        .iter()
        .map(|&i| sample.values()[i] - spec.mean()[i])
        .collect();
    let sigma_om = spec.sub_cov(&obs, &miss);
    // A = Σ_oo⁻¹ Σ_om, so mean_m = μ_m + Aᵀ r and V = Σ_mm − Σ_omᵀ A.
    let a = chol_oo.solve_mat(&sigma_om);
    let mut imputed = sample.values().to_vec();
    for (j, &mj) in miss.iter().enumerate() {
        let mut acc = spec.mean()[mj];
        for (i, &ri) in resid.iter().enumerate() {
            acc += a[(i, j)] * ri;
        }
        imputed[mj] = acc;
    }
    let sigma_mm = spec.sub_cov(&miss, &miss);
    let m = miss.len();
    let mut cond_var = Mat::zeros(n, n);
    for j in 0..m {
        for k in 0..m {
            let mut acc = sigma_mm[(j, k)];
            for i in 0..obs.len() {
                acc -= sigma_om[(i, j)] * a[(i, k)];
            }
            cond_var[(miss[j], miss[k])] = acc;
        }
    }
    // enforce symmetry lost to rounding
    for j in 0..m {
        for k in (j + 1)..m {
            let avg = (cond_var[(miss[j], miss[k])] + cond_var[(miss[k], miss[j])]) / fp::<S>(2.0);
            cond_var[(miss[j], miss[k])] = avg;
            cond_var[(miss[k], miss[j])] = avg;
        }
    }
    Ok(ConditionalMoments {
        imputed_mean: imputed,
        cond_var,
    })
}

/// Expected Gaussian cost of a sample:
/// `log|Σ| + E[(X − μ)ᵀ Σ⁻¹ (X − μ) | X_obs]`.
///
/// Equals `log|Σ|` plus the observed-block Mahalanobis distance plus the
/// number of missing entries (the trace correction with the exact
/// conditional variance contracts to the missing count). A fully missing
/// sample therefore costs `log|Σ| + B*T`.
pub fn expected_gaussian_cost<S: Scalar>(
    sample: &SpectroTemporalSample<S>,
    spec: &GaussianSpec<S>,
) -> Result<S, Error> {
    let prepared = PreparedSpec::new(spec.clone())?;
    prepared.expected_cost(sample)
}

/// Log-density of the observed sub-vector under the marginal normal.
///
/// A fully missing sample returns `0` (the empty marginal is normalized), so
/// such years carry no class information.
pub fn observed_loglik<S: Scalar>(
    sample: &SpectroTemporalSample<S>,
    spec: &GaussianSpec<S>,
) -> Result<S, Error> {
    check_dims(sample, spec)?;
    let obs = sample.observed_indices();
    if obs.is_empty() {
        return Ok(S::zero());
    }
    let chol_oo = spec.chol_observed(&obs)?;
    let resid: Vec<S> = obs
        .iter()
        .map(|&i| sample.values()[i] - spec.mean()[i])
        .collect();
    let quad = chol_oo.quad_form(&resid);
    let n_o = fp::<S>(obs.len() as f64);
    let two_pi = fp::<S>(2.0) * S::PI();
    Ok(-(n_o * two_pi.ln() + chol_oo.log_det() + quad) / fp::<S>(2.0))
}

/// A [`GaussianSpec`] with its full-covariance log-determinant cached, so
/// per-sample statistics only factorize the observed block.
#[derive(Clone, Debug)]
pub struct PreparedSpec<S> {
    spec: GaussianSpec<S>,
    full_log_det: S,
}

impl<S: Scalar> PreparedSpec<S> {
    pub fn new(spec: GaussianSpec<S>) -> Result<Self, Error> {
        let full_log_det = spec.chol_full()?.log_det();
        Ok(PreparedSpec { spec, full_log_det })
    }

    pub fn spec(&self) -> &GaussianSpec<S> {
        &self.spec
    }

    pub fn full_log_det(&self) -> S {
        self.full_log_det
    }

    /// Expected cost and observed log-likelihood sharing one factorization.
    pub fn cost_and_loglik(&self, sample: &SpectroTemporalSample<S>) -> Result<(S, S), Error> {
        check_dims(sample, &self.spec)?;
        let obs = sample.observed_indices();
        let n_miss = fp::<S>((sample.dim() - obs.len()) as f64);
        if obs.is_empty() {
            return Ok((self.full_log_det + n_miss, S::zero()));
        }
        let chol_oo = self.spec.chol_observed(&obs)?;
        let resid: Vec<S> = obs
            .iter()
            .map(|&i| sample.values()[i] - self.spec.mean()[i])
            .collect();
        let quad = chol_oo.quad_form(&resid);
        let cost = self.full_log_det + quad + n_miss;
        let n_o = fp::<S>(obs.len() as f64);
        let two_pi = fp::<S>(2.0) * S::PI();
        let loglik = -(n_o * two_pi.ln() + chol_oo.log_det() + quad) / fp::<S>(2.0);
        Ok((cost, loglik))
    }

    pub fn expected_cost(&self, sample: &SpectroTemporalSample<S>) -> Result<S, Error> {
        Ok(self.cost_and_loglik(sample)?.0)
    }

    pub fn observed_loglik(&self, sample: &SpectroTemporalSample<S>) -> Result<S, Error> {
        Ok(self.cost_and_loglik(sample)?.1)
    }

    /// Imputed mean only (observed entries pass through).
    pub fn imputed_mean(&self, sample: &SpectroTemporalSample<S>) -> Result<Vec<S>, Error> {
        check_dims(sample, &self.spec)?;
        let miss = sample.missing_indices();
        if miss.is_empty() {
            return Ok(sample.values().to_vec());
        }
        if miss.len() == sample.dim() {
            return Ok(self.spec.mean().to_vec());
        }
        let obs = sample.observed_indices();
        let chol_oo = self.spec.chol_observed(&obs)?;
        let resid: Vec<S> = obs
            .iter()
            .map(|&i| sample.values()[i] - self.spec.mean()[i])
            .collect();
        let w = chol_oo.solve_vec(&resid);
        let sigma_om = self.spec.sub_cov(&obs, &miss);
        let mut imputed = sample.values().to_vec();
        for (j, &mj) in miss.iter().enumerate() {
            let mut acc = self.spec.mean()[mj];
            for i in 0..obs.len() {
                acc += sigma_om[(i, j)] * w[i];
            }
            imputed[mj] = acc;
        }
        Ok(imputed)
    }
}

/// Dense Kronecker product of a spectral (`B x B`) and temporal (`T x T`)
/// factor, index-matched to the column-order sample flattening.
pub fn densify_kronecker<S: Scalar>(sigma_s: &Mat<S>, sigma_t: &Mat<S>) -> Result<Mat<S>, Error> {
    let model: CovModel<S> = CovModel::Kronecker {
        spectral: sigma_s.clone(),
        temporal: sigma_t.clone(),
    };
    model.validate()?;
    let b = sigma_s.rows();
    let t = sigma_t.rows();
    let n = b * t;
    let mut out = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            out[(i, j)] = sigma_s[(i % b, j % b)] * sigma_t[(i / b, j / b)];
        }
    }
    Ok(out)
}

/// Eigenvalue scaling used by the PCA compression.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PcaScaling {
    /// Rows scaled by `1/λ_k`.
    InverseEigenvalue,
    /// Whitening variant: rows scaled by `1/sqrt(λ_k)`.
    InverseSqrt,
}

/// Spectral PCA projection derived from the eigen-decomposition of the
/// spectral covariance.
#[derive(Clone, Debug)]
pub struct PcaProjection<S> {
    /// All `B` eigenvalues of the spectral covariance, descending.
    pub eigenvalues: Vec<S>,
    /// `K x B` row weights: `Diag(scale) P_{1:K}ᵀ`.
    pub weights: Mat<S>,
    pub k: usize,
    pub scaling: PcaScaling,
}

impl<S: Scalar> PcaProjection<S> {
    pub fn new(sigma_s: &Mat<S>, k: usize, scaling: PcaScaling) -> Result<Self, Error> {
        if !sigma_s.is_square() {
            return Err(Error::DimensionMismatch {
                what: "spectral covariance columns".into(),
                expected: sigma_s.rows(),
                got: sigma_s.cols(),
            });
        }
        let b = sigma_s.rows();
        if k == 0 || k > b {
            return Err(Error::InvalidParameter {
                name: "K".into(),
                reason: format!("compression rank {k} outside 1..={b}"),
            });
        }
        let (eigenvalues, mut p) = sigma_s.sym_eigen()?;
        if eigenvalues[b - 1] <= S::zero() {
            return Err(Error::NotPositiveDefinite { pivot: b - 1 });
        }
        // canonical eigenvector signs: largest-magnitude component positive
        for c in 0..b {
            let mut best = 0;
            for r in 1..b {
                if p[(r, c)].abs() > p[(best, c)].abs() {
                    best = r;
                }
            }
            if p[(best, c)] < S::zero() {
                for r in 0..b {
                    p[(r, c)] = -p[(r, c)];
                }
            }
        }
        let mut weights = Mat::zeros(k, b);
        for row in 0..k {
            let scale = match scaling {
                PcaScaling::InverseEigenvalue => S::one() / eigenvalues[row],
                PcaScaling::InverseSqrt => S::one() / eigenvalues[row].sqrt(),
            };
            for col in 0..b {
                weights[(row, col)] = scale * p[(col, row)];
            }
        }
        Ok(PcaProjection {
            eigenvalues,
            weights,
            k,
            scaling,
        })
    }

    /// Compress a sample to `K` spectral rows. Any missing band at a time
    /// point masks all `K` compressed rows at that time point, because the
    /// projection mixes bands.
    pub fn compress(&self, sample: &SpectroTemporalSample<S>) -> Result<SpectroTemporalSample<S>, Error> {
        let b = self.weights.cols();
        if sample.bands() != b {
            return Err(Error::DimensionMismatch {
                what: "sample bands vs projection".into(),
                expected: b,
                got: sample.bands(),
            });
        }
        let t_len = sample.times();
        let mut values = vec![S::zero(); self.k * t_len];
        let mut mask = vec![false; self.k * t_len];
        for t in 0..t_len {
            let any_missing = (0..b).any(|band| sample.is_missing(band, t));
            if any_missing {
                for row in 0..self.k {
                    mask[t * self.k + row] = true;
                }
                continue;
            }
            for row in 0..self.k {
                let mut acc = S::zero();
                for band in 0..b {
                    acc += self.weights[(row, band)] * sample.value(band, t);
                }
                values[t * self.k + row] = acc;
            }
        }
        SpectroTemporalSample::new(self.k, t_len, values, mask)
    }
}

/// Compress a sample with the printed inverse-eigenvalue scaling.
pub fn pca_compress<S: Scalar>(
    sample: &SpectroTemporalSample<S>,
    sigma_s: &Mat<S>,
    k: usize,
) -> Result<SpectroTemporalSample<S>, Error> {
    PcaProjection::new(sigma_s, k, PcaScaling::InverseEigenvalue)?.compress(sample)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn exact_spec(mean: Vec<f64>, cov: Mat<f64>) -> GaussianSpec<f64> {
        GaussianSpec::new(mean, CovModel::Dense(cov))
            .unwrap()
            .with_jitter_scale(0.0)
    }

    #[test]
    fn bivariate_conditional_closed_form() {
        let cov = Mat::from_rows(&[vec![1.0, 0.5], vec![0.5, 1.0]]).unwrap();
        let spec = exact_spec(vec![0.0, 0.0], cov);
        let sample =
            SpectroTemporalSample::new(1, 2, vec![1.0, 0.0], vec![false, true]).unwrap();
        let cm = conditional_moments(&sample, &spec).unwrap();
        assert_relative_eq!(cm.imputed_mean[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(cm.imputed_mean[1], 0.5, epsilon = 1e-12);
        assert_relative_eq!(cm.cond_var[(1, 1)], 0.75, epsilon = 1e-12);
        assert_eq!(cm.cond_var[(0, 0)], 0.0);
        assert_eq!(cm.cond_var[(0, 1)], 0.0);
    }

    #[test]
    fn no_missing_entries_gives_zero_variance() {
        let cov = Mat::from_rows(&[vec![2.0, 0.3], vec![0.3, 1.0]]).unwrap();
        let spec = exact_spec(vec![0.5, -0.5], cov);
        let sample = SpectroTemporalSample::fully_observed(2, 1, vec![1.0, 2.0]).unwrap();
        let cm = conditional_moments(&sample, &spec).unwrap();
        assert_eq!(cm.imputed_mean, vec![1.0, 2.0]);
        assert!(cm.cond_var.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn all_missing_returns_marginal() {
        let cov = Mat::from_rows(&[vec![2.0, 0.3], vec![0.3, 1.0]]).unwrap();
        let spec = exact_spec(vec![0.5, -0.5], cov.clone());
        let sample = SpectroTemporalSample::fully_missing(2, 1);
        let cm = conditional_moments(&sample, &spec).unwrap();
        assert_eq!(cm.imputed_mean, vec![0.5, -0.5]);
        for i in 0..2 {
            for j in 0..2 {
                assert_relative_eq!(cm.cond_var[(i, j)], cov[(i, j)], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn cost_zero_at_mean_identity_cov() {
        let spec = exact_spec(vec![1.0, 2.0], Mat::identity(2));
        let sample = SpectroTemporalSample::fully_observed(2, 1, vec![1.0, 2.0]).unwrap();
        assert_relative_eq!(expected_gaussian_cost(&sample, &spec).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn cost_with_one_missing_entry() {
        // observed 3 at identity covariance: quadratic 9, trace correction 1
        let spec = exact_spec(vec![0.0, 0.0], Mat::identity(2));
        let sample =
            SpectroTemporalSample::new(1, 2, vec![3.0, 0.0], vec![false, true]).unwrap();
        assert_relative_eq!(expected_gaussian_cost(&sample, &spec).unwrap(), 10.0, epsilon = 1e-12);
    }

    #[test]
    fn cost_fully_missing_is_dimension() {
        let n = 6;
        let spec = exact_spec(vec![0.0; n], Mat::identity(n));
        let sample = SpectroTemporalSample::fully_missing(2, 3);
        assert_relative_eq!(
            expected_gaussian_cost(&sample, &spec).unwrap(),
            n as f64,
            epsilon = 1e-12
        );
    }

    #[test]
    fn loglik_standard_normal_at_mode() {
        let spec = exact_spec(vec![0.0], Mat::identity(1));
        let sample = SpectroTemporalSample::fully_observed(1, 1, vec![0.0]).unwrap();
        let ll = observed_loglik(&sample, &spec).unwrap();
        assert_relative_eq!(ll, -0.5 * (2.0 * std::f64::consts::PI).ln(), epsilon = 1e-12);
        assert_relative_eq!(ll, -0.91894, epsilon = 1e-5);
    }

    #[test]
    fn loglik_fully_missing_is_zero() {
        let spec = exact_spec(vec![0.0, 0.0], Mat::identity(2));
        let sample = SpectroTemporalSample::fully_missing(1, 2);
        assert_eq!(observed_loglik(&sample, &spec).unwrap(), 0.0);
    }

    #[test]
    fn loglik_marginalizes_missing_coordinate() {
        let spec = exact_spec(vec![0.0, 0.0], Mat::identity(2));
        let sample =
            SpectroTemporalSample::new(1, 2, vec![1.0, 0.0], vec![false, true]).unwrap();
        let ll = observed_loglik(&sample, &spec).unwrap();
        assert_relative_eq!(
            ll,
            -0.5 * (2.0 * std::f64::consts::PI).ln() - 0.5,
            epsilon = 1e-12
        );
    }

    #[test]
    fn default_jitter_shifts_results_only_slightly() {
        let cov = Mat::from_rows(&[vec![1.0, 0.5], vec![0.5, 1.0]]).unwrap();
        let exact = exact_spec(vec![0.0, 0.0], cov.clone());
        let jittered = GaussianSpec::new(vec![0.0, 0.0], CovModel::Dense(cov)).unwrap();
        let sample =
            SpectroTemporalSample::new(1, 2, vec![1.0, 0.0], vec![false, true]).unwrap();
        let a = observed_loglik(&sample, &exact).unwrap();
        let b = observed_loglik(&sample, &jittered).unwrap();
        assert!((a - b).abs() < 1e-6);
        assert!(a != b);
    }

    #[test]
    fn prepared_spec_matches_free_functions() {
        let cov = Mat::from_rows(&[
            vec![2.0, 0.4, 0.1],
            vec![0.4, 1.5, 0.2],
            vec![0.1, 0.2, 1.0],
        ])
        .unwrap();
        let spec = exact_spec(vec![0.1, -0.2, 0.3], cov);
        let sample = SpectroTemporalSample::new(
            3,
            1,
            vec![1.0, 0.0, -1.0],
            vec![false, true, false],
        )
        .unwrap();
        let prepared = PreparedSpec::new(spec.clone()).unwrap();
        let (cost, ll) = prepared.cost_and_loglik(&sample).unwrap();
        assert_relative_eq!(cost, expected_gaussian_cost(&sample, &spec).unwrap(), epsilon = 1e-12);
        assert_relative_eq!(ll, observed_loglik(&sample, &spec).unwrap(), epsilon = 1e-12);
        let cm = conditional_moments(&sample, &spec).unwrap();
        let im = prepared.imputed_mean(&sample).unwrap();
        for (a, b) in cm.imputed_mean.iter().zip(&im) {
            assert_relative_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn kronecker_identity_factors() {
        let k = densify_kronecker(&Mat::<f64>::identity(2), &Mat::identity(3)).unwrap();
        assert_eq!(k, Mat::identity(6));
    }

    #[test]
    fn kronecker_scalar_factor_scales() {
        let sigma_t = Mat::from_rows(&[vec![1.0, 0.3], vec![0.3, 2.0]]).unwrap();
        let sigma_s = Mat::diag(&[2.0]);
        let k = densify_kronecker(&sigma_s, &sigma_t).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_relative_eq!(k[(i, j)], 2.0 * sigma_t[(i, j)], epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn kronecker_log_det_identity() {
        let sigma_s = Mat::from_rows(&[vec![2.0, 0.5], vec![0.5, 1.0]]).unwrap();
        let sigma_t = Mat::from_rows(&[
            vec![1.5, 0.2, 0.0],
            vec![0.2, 1.0, 0.1],
            vec![0.0, 0.1, 0.8],
        ])
        .unwrap();
        let dense = densify_kronecker(&sigma_s, &sigma_t).unwrap();
        let ld = dense.cholesky().unwrap().log_det();
        let ld_s = sigma_s.cholesky().unwrap().log_det();
        let ld_t = sigma_t.cholesky().unwrap().log_det();
        assert_relative_eq!(ld, 3.0 * ld_s + 2.0 * ld_t, max_relative = 1e-11);
    }

    #[test]
    fn kronecker_entries_match_sample_layout() {
        // cov((b,t),(b',t')) = sigma_s[b,b'] * sigma_t[t,t'] under flat
        // index t*B+b
        let sigma_s = Mat::from_rows(&[vec![2.0, 0.5], vec![0.5, 1.0]]).unwrap();
        let sigma_t = Mat::from_rows(&[vec![1.5, 0.2], vec![0.2, 1.0]]).unwrap();
        let dense = densify_kronecker(&sigma_s, &sigma_t).unwrap();
        let b = 2;
        for t in 0..2 {
            for bb in 0..2 {
                for t2 in 0..2 {
                    for b2 in 0..2 {
                        assert_eq!(
                            dense[(t * b + bb, t2 * b + b2)],
                            sigma_s[(bb, b2)] * sigma_t[(t, t2)]
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn pca_identity_spectral_cov_is_identity_map() {
        let b = 3;
        let values: Vec<f64> = (0..b * 2).map(|i| i as f64).collect();
        let sample = SpectroTemporalSample::fully_observed(b, 2, values.clone()).unwrap();
        let out = pca_compress(&sample, &Mat::identity(b), b).unwrap();
        for (a, b_) in out.values().iter().zip(&values) {
            assert_relative_eq!(a, b_, epsilon = 1e-10);
        }
    }

    #[test]
    fn pca_diagonal_scaling_example() {
        // spectral cov Diag(4,1), K=1: first eigen-axis is band 0, scale 1/4
        let sigma_s = Mat::diag(&[4.0, 1.0]);
        let sample = SpectroTemporalSample::fully_observed(
            2,
            2,
            vec![8.0, -1.0, 4.0, -2.0], // band0=(8,4), band1=(-1,-2)
        )
        .unwrap();
        let out = pca_compress(&sample, &sigma_s, 1).unwrap();
        assert_eq!(out.bands(), 1);
        assert_eq!(out.times(), 2);
        assert_relative_eq!(out.value(0, 0), 2.0, epsilon = 1e-12);
        assert_relative_eq!(out.value(0, 1), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn pca_whitening_scaling() {
        let sigma_s = Mat::diag(&[4.0, 1.0]);
        let proj = PcaProjection::new(&sigma_s, 1, PcaScaling::InverseSqrt).unwrap();
        let sample =
            SpectroTemporalSample::fully_observed(2, 1, vec![8.0, 0.0]).unwrap();
        let out = proj.compress(&sample).unwrap();
        assert_relative_eq!(out.value(0, 0), 4.0, epsilon = 1e-12);
    }

    #[test]
    fn pca_propagates_missingness_across_rows() {
        let sigma_s = Mat::identity(3);
        let mut mask = vec![false; 3 * 2];
        mask[SpectroTemporalSample::<f64>::flat_index(3, 1, 0)] = true; // band 1, time 0
        let sample =
            SpectroTemporalSample::new(3, 2, vec![1.0; 6], mask).unwrap();
        let out = pca_compress(&sample, &sigma_s, 2).unwrap();
        for row in 0..2 {
            assert!(out.is_missing(row, 0));
            assert!(!out.is_missing(row, 1));
        }
    }

    #[test]
    fn pca_rejects_bad_rank() {
        let sigma_s = Mat::<f64>::identity(2);
        let sample = SpectroTemporalSample::fully_observed(2, 1, vec![0.0, 0.0]).unwrap();
        assert!(pca_compress(&sample, &sigma_s, 0).is_err());
        assert!(pca_compress(&sample, &sigma_s, 3).is_err());
    }

    #[test]
    fn pca_pushforward_covariance() {
        // compressed model covariance is Diag(1/λ) (spectral) x Σ_t
        let sigma_s = Mat::from_rows(&[vec![3.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let sigma_t = Mat::from_rows(&[vec![1.0, 0.4], vec![0.4, 1.5]]).unwrap();
        let (b, t) = (2usize, 2usize);
        let k = 2usize;
        let proj = PcaProjection::new(&sigma_s, k, PcaScaling::InverseEigenvalue).unwrap();
        // big linear map on flattened vectors: y[t*K+r] = sum_b W[r,b] x[t*B+b]
        let mut l = Mat::<f64>::zeros(k * t, b * t);
        for tt in 0..t {
            for r in 0..k {
                for bb in 0..b {
                    l[(tt * k + r, tt * b + bb)] = proj.weights[(r, bb)];
                }
            }
        }
        let dense = densify_kronecker(&sigma_s, &sigma_t).unwrap();
        let pushed = l.matmul(&dense).matmul(&l.transpose());
        let inv_lambda: Vec<f64> = proj.eigenvalues.iter().take(k).map(|&v| 1.0 / v).collect();
        let expected = densify_kronecker(&Mat::diag(&inv_lambda), &sigma_t).unwrap();
        for i in 0..k * t {
            for j in 0..k * t {
                assert_relative_eq!(pushed[(i, j)], expected[(i, j)], epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn masked_values_are_canonicalized_to_zero() {
        let s = SpectroTemporalSample::new(1, 2, vec![5.0, 7.0], vec![false, true]).unwrap();
        assert_eq!(s.values(), &[5.0, 0.0]);
    }

    #[test]
    fn expand_mask_to_timesteps_widens() {
        let mut mask = vec![false; 4];
        mask[SpectroTemporalSample::<f64>::flat_index(2, 0, 1)] = true;
        let s = SpectroTemporalSample::new(2, 2, vec![1.0; 4], mask).unwrap();
        let e = s.expand_mask_to_timesteps();
        assert!(!e.is_missing(0, 0) && !e.is_missing(1, 0));
        assert!(e.is_missing(0, 1) && e.is_missing(1, 1));
    }

    #[test]
    fn pixel_series_validates_shapes() {
        let y1 = SpectroTemporalSample::<f64>::fully_missing(2, 2);
        let y2 = SpectroTemporalSample::<f64>::fully_missing(2, 3);
        assert!(PixelSeries::new("p", vec![y1.clone(), y2]).is_err());
        let p = PixelSeries::new("p", vec![y1.clone(), y1]).unwrap();
        assert_eq!(p.dims(), (2, 2, 2));
    }
}
