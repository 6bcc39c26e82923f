//! Joint non-negative factorization of per-snapshot similarities.
//!
//! Each target `W_t` is approximated by `U V_tᵀ` with a shared global factor
//! `U` and a temporary factor `V_t` per snapshot. The objective adds a graph
//! regularizer `γ Σ_t Tr(Uᵀ L_t U)`, with `L_t` the Laplacian of `H_t`, and
//! a smoothness penalty `λ Σ_{t≥2} ‖V_t − V_{t−1}‖²_F`:
//!
//! ```text
//! J = Σ_t w_t ‖W_t − U V_tᵀ‖²_F + γ Σ_t Tr(Uᵀ L_t U) + λ Σ_{t≥2} w_t ‖V_t − V_{t−1}‖²_F
//! ```
//!
//! where `w_t = θ^{N−t}` in [`WeightingMode::ThetaWeighted`] and `w_t = 1`
//! in [`WeightingMode::Simplified`].
//!
//! Both factors are updated multiplicatively with square-rooted ratios of
//! the negative and positive parts of the gradient:
//!
//! ```text
//! V_t ← V_t ⊙ √((W_t U + λ V_{t−1}) ⊘ (V_t UᵀU + λ V_t + ε))
//! U   ← U ⊙ √(Σ_t (W_t V_t + γ H_t U) ⊘ Σ_t (U V_tᵀV_t + γ D_t U + ε))
//! ```
//!
//! `D_t` is the diagonal of row sums of `H_t`. The first snapshot has no
//! backward smoothness term. `V_t` are swept in order `t = 1..N`, each
//! seeing the already updated `V_{t−1}`, then `U` is updated.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use ndarray::{Array2, Zip};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::randwalk::SimilarityPair;
use crate::sparsemat::{frobenius_sq_diff, CsrMatrix, DenseFactor, Matrix, EPS};

/// How the decay weight `θ` enters the updates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightingMode {
    /// Every snapshot weighs 1.
    #[default]
    Simplified,
    /// Snapshot `t` weighs `θ^{N−t}` in reconstruction and smoothness.
    ThetaWeighted,
}

/// Which smoothness couplings enter the `V_t` update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SmoothnessMode {
    /// Only the backward term `λ(V_t − V_{t−1})`.
    #[default]
    OneSided,
    /// Backward and forward terms: the exact gradient of the penalty.
    FullGradient,
}

macro_rules! kebab_enum_io {
    ($ty:ty, $($variant:path => $name:literal),+) => {
        impl FromStr for $ty {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s.trim() {
                    $($name => Ok($variant),)+
                    other => Err(Error::InvalidParam(format!(
                        concat!("unknown ", stringify!($ty), " `{}`"), other
                    ))),
                }
            }
        }
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $($variant => $name,)+ })
            }
        }
    };
}

kebab_enum_io!(WeightingMode,
    WeightingMode::Simplified => "simplified",
    WeightingMode::ThetaWeighted => "theta-weighted");
kebab_enum_io!(SmoothnessMode,
    SmoothnessMode::OneSided => "one-sided",
    SmoothnessMode::FullGradient => "full-gradient");

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperParams {
    /// Representation dimension.
    pub m: usize,
    /// Decay weight in `[0, 1]`.
    pub theta: f64,
    /// Smoothness weight.
    pub lambda: f64,
    /// Graph-regularizer weight.
    pub gamma: f64,
    pub max_iters: usize,
    /// Stop once the relative objective change drops below this.
    pub rel_tol: f64,
    pub seed: u64,
    pub weighting_mode: WeightingMode,
    pub smoothness_mode: SmoothnessMode,
}

impl Default for HyperParams {
    fn default() -> Self {
        HyperParams {
            m: 5,
            theta: 0.4,
            lambda: 1e-4,
            gamma: 1.0,
            max_iters: 100,
            rel_tol: 1e-4,
            seed: 0,
            weighting_mode: WeightingMode::Simplified,
            smoothness_mode: SmoothnessMode::OneSided,
        }
    }
}

impl HyperParams {
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::InvalidParam("m must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.theta) {
            return Err(Error::InvalidParam(format!("theta must lie in [0, 1], got {}", self.theta)));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidParam(format!("lambda must be >= 0, got {}", self.lambda)));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidParam(format!("gamma must be >= 0, got {}", self.gamma)));
        }
        if self.rel_tol.is_nan() || self.rel_tol < 0.0 {
            return Err(Error::InvalidParam(format!("rel_tol must be >= 0 (0 runs every iteration), got {}", self.rel_tol)));
        }
        Ok(())
    }

    /// Weight of snapshot `t` (0-based) out of `n`.
    pub fn snapshot_weight(&self, t: usize, n: usize) -> f64 {
        match self.weighting_mode {
            WeightingMode::Simplified => 1.0,
            WeightingMode::ThetaWeighted => self.theta.powi((n - 1 - t) as i32),
        }
    }
}

/// Global factor, temporary factors and optimizer bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorState {
    pub u: DenseFactor,
    pub v: Vec<DenseFactor>,
    /// Objective at initialization followed by one value per iteration.
    pub objective_trace: Vec<f64>,
    pub iters_run: usize,
    pub converged: bool,
}

impl FactorState {
    /// A state with no history, e.g. for warm starts.
    pub fn new(u: DenseFactor, v: Vec<DenseFactor>) -> Result<Self> {
        if v.is_empty() {
            return Err(Error::InvalidParam("at least one temporary factor is required".into()));
        }
        for vt in &v {
            if vt.dim() != u.dim() {
                return Err(Error::Shape {
                    op: "factor state",
                    left: u.dim(),
                    right: vt.dim(),
                });
            }
        }
        Ok(FactorState {
            u,
            v,
            objective_trace: Vec::new(),
            iters_run: 0,
            converged: false,
        })
    }

    /// Draws `V_1..V_N` and then `U` with i.i.d. entries in `(0, 1]`.
    pub fn random(nodes: usize, m: usize, snapshots: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = || Array2::from_shape_simple_fn((nodes, m), || 1.0 - rng.gen::<f64>());
        let v = (0..snapshots).map(|_| DenseFactor::new(draw()).expect("positive")).collect();
        let u = DenseFactor::new(draw()).expect("positive");
        FactorState {
            u,
            v,
            objective_trace: Vec::new(),
            iters_run: 0,
            converged: false,
        }
    }

    pub fn nodes(&self) -> usize {
        self.u.nrows()
    }

    pub fn rank(&self) -> usize {
        self.u.ncols()
    }

    /// `‖W_t − U V_tᵀ‖²_F` for every snapshot.
    pub fn reconstruction_errors(&self, pairs: &[SimilarityPair]) -> Result<Vec<f64>> {
        pairs
            .iter()
            .zip(&self.v)
            .map(|(p, vt)| frobenius_sq_diff(&p.w, &Matrix::Dense(self.u.dot(&vt.t()))))
            .collect()
    }

    /// Writes `U.tsv`, `V_<t>.tsv` and `factor_meta.json` into `dir`.
    pub fn save(&self, dir: impl AsRef<Path>, hp: &HyperParams) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        write_tsv(&dir.join("U.tsv"), &self.u)?;
        for (t, vt) in self.v.iter().enumerate() {
            write_tsv(&dir.join(format!("V_{}.tsv", t + 1)), vt)?;
        }
        let meta = FactorMeta {
            hyper_params: *hp,
            nodes: self.nodes(),
            snapshots: self.v.len(),
            iters_run: self.iters_run,
            converged: self.converged,
            objective_trace: self.objective_trace.clone(),
        };
        let path = dir.join("factor_meta.json");
        let text = serde_json::to_string_pretty(&meta).expect("metadata serializes");
        fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))
    }

    /// Reads a state written by [`FactorState::save`] along with its
    /// hyper-parameters.
    pub fn load(dir: impl AsRef<Path>) -> Result<(FactorState, HyperParams)> {
        let dir = dir.as_ref();
        let path = dir.join("factor_meta.json");
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let meta: FactorMeta = serde_json::from_str(&text).map_err(|e| Error::Parse {
            line: e.line(),
            msg: format!("{}: {e}", path.display()),
        })?;
        let u = DenseFactor::new(read_tsv(&dir.join("U.tsv"))?)?;
        let v = (1..=meta.snapshots)
            .map(|t| DenseFactor::new(read_tsv(&dir.join(format!("V_{t}.tsv")))?))
            .collect::<Result<Vec<_>>>()?;
        let mut state = FactorState::new(u, v)?;
        state.objective_trace = meta.objective_trace;
        state.iters_run = meta.iters_run;
        state.converged = meta.converged;
        Ok((state, meta.hyper_params))
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct FactorMeta {
    hyper_params: HyperParams,
    nodes: usize,
    snapshots: usize,
    iters_run: usize,
    converged: bool,
    objective_trace: Vec<f64>,
}

fn write_tsv(path: &Path, a: &Array2<f64>) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = std::io::BufWriter::new(file);
    for row in a.outer_iter() {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        writeln!(out, "{}", line.join("\t")).map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

fn read_tsv(path: &Path) -> Result<Array2<f64>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut values = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for (n, line) in text.lines().enumerate() {
        let row = line
            .split('\t')
            .map(|s| s.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Parse {
                line: n + 1,
                msg: format!("{}: {e}", path.display()),
            })?;
        if *cols.get_or_insert(row.len()) != row.len() {
            return Err(Error::Parse {
                line: n + 1,
                msg: format!("{}: ragged row", path.display()),
            });
        }
        values.extend(row);
        rows += 1;
    }
    Array2::from_shape_vec((rows, cols.unwrap_or(0)), values).map_err(|e| Error::Parse {
        line: rows,
        msg: e.to_string(),
    })
}

/// Laplacian `L = D − H` of a similarity matrix and the degree diagonal `D`.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplacianPair {
    pub l: Matrix,
    pub dh: Vec<f64>,
}

impl LaplacianPair {
    pub fn from_similarity(h: &Matrix) -> Result<Self> {
        if let Some((i, j)) = h.first_asymmetry() {
            return Err(Error::Asymmetric { i, j });
        }
        let dh = h.row_sums();
        let l = match h {
            Matrix::Dense(d) => {
                let mut l = -d.clone();
                for (i, &di) in dh.iter().enumerate() {
                    l[[i, i]] += di;
                }
                Matrix::Dense(l)
            }
            Matrix::Sparse(s) => Matrix::Sparse(CsrMatrix::from_diagonal(&dh).add(&s.scale(-1.0))?),
        };
        Ok(LaplacianPair { l, dh })
    }
}

/// `Tr(Uᵀ (D − H) U)` computed as `Σ_i d_i ‖u_i‖² − ⟨U, H U⟩`.
fn laplacian_trace(h: &Matrix, u: &Array2<f64>) -> Result<f64> {
    let hu = h.mul_dense(u)?;
    let dh = h.row_sums();
    let mut total = 0.0;
    for (i, row) in u.outer_iter().enumerate() {
        let norm: f64 = row.iter().map(|x| x * x).sum();
        let cross: f64 = row.iter().zip(hu.row(i)).map(|(a, b)| a * b).sum();
        total += dh[i] * norm - cross;
    }
    Ok(total)
}

/// `½ Σ_ij ‖u_i − u_j‖² H_ij`, evaluated over the stored entries of `H`.
pub fn constraint_term_pairwise(h: &Matrix, u: &Array2<f64>) -> Result<f64> {
    if h.shape().0 != u.nrows() {
        return Err(Error::Shape {
            op: "constraint_term",
            left: h.shape(),
            right: u.dim(),
        });
    }
    let mut total = 0.0;
    for (i, j, hij) in h.entries() {
        let d: f64 = u.row(i).iter().zip(u.row(j)).map(|(a, b)| (a - b) * (a - b)).sum();
        total += d * hij;
    }
    Ok(0.5 * total)
}

/// Graph-regularization term `M_t = Tr(Uᵀ L_t U)`. Evaluates both the trace
/// and the pairwise form and fails if they disagree beyond `1e-9`.
pub fn constraint_term(h: &Matrix, u: &Array2<f64>) -> Result<f64> {
    if let Some((i, j)) = h.first_asymmetry() {
        return Err(Error::Asymmetric { i, j });
    }
    let trace = laplacian_trace(h, u)?;
    let pairwise = constraint_term_pairwise(h, u)?;
    if (trace - pairwise).abs() > 1e-9 * trace.abs().max(pairwise.abs()).max(1.0) {
        return Err(Error::Numerical(format!(
            "constraint forms disagree: trace {trace} vs pairwise {pairwise}"
        )));
    }
    Ok(trace)
}

fn check_problem(pairs: &[SimilarityPair], state: &FactorState) -> Result<()> {
    if pairs.is_empty() {
        return Err(Error::EmptyInput("no similarity pairs".into()));
    }
    if pairs.len() != state.v.len() {
        return Err(Error::InvalidParam(format!(
            "{} similarity pairs but {} temporary factors",
            pairs.len(),
            state.v.len()
        )));
    }
    let n = state.nodes();
    for p in pairs {
        for m in [&p.h, &p.w] {
            if m.shape() != (n, n) {
                return Err(Error::Shape {
                    op: "factorization",
                    left: m.shape(),
                    right: (n, n),
                });
            }
        }
    }
    Ok(())
}

/// Value of the objective for the current state.
pub fn objective(pairs: &[SimilarityPair], state: &FactorState, hp: &HyperParams) -> Result<f64> {
    check_problem(pairs, state)?;
    let n = pairs.len();
    let recon = state.reconstruction_errors(pairs)?;
    let mut total = 0.0;
    for (t, err) in recon.iter().enumerate() {
        total += hp.snapshot_weight(t, n) * err;
    }
    if hp.gamma != 0.0 {
        for p in pairs {
            total += hp.gamma * laplacian_trace(&p.h, &state.u)?;
        }
    }
    if hp.lambda != 0.0 {
        for t in 1..n {
            let diff: f64 = state.v[t]
                .iter()
                .zip(state.v[t - 1].iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            total += hp.lambda * hp.snapshot_weight(t, n) * diff;
        }
    }
    Ok(total)
}

/// `base ⊙ √(num ⊘ (den + ε))`.
fn sqrt_ratio_update(base: &Array2<f64>, num: &Array2<f64>, den: &Array2<f64>) -> Array2<f64> {
    let mut out = base.clone();
    Zip::from(&mut out).and(num).and(den).for_each(|b, &nu, &de| {
        if *b != 0.0 {
            *b *= (nu / (de + EPS)).sqrt();
        }
    });
    out
}

/// New value of `V_t` (0-based `t`) given the rest of the state.
pub fn update_v(t: usize, pairs: &[SimilarityPair], state: &FactorState, hp: &HyperParams) -> Result<DenseFactor> {
    check_problem(pairs, state)?;
    let n = pairs.len();
    if t >= n {
        return Err(Error::OutOfRange { index: t, len: n });
    }
    let u = &*state.u;
    let vt = &*state.v[t];
    let wt = hp.snapshot_weight(t, n);
    let mut num = pairs[t].w.mul_dense(u)? * wt;
    let mut den = vt.dot(&u.t().dot(u)) * wt;
    if t > 0 {
        num.scaled_add(hp.lambda * wt, &*state.v[t - 1]);
        den.scaled_add(hp.lambda * wt, vt);
    }
    if hp.smoothness_mode == SmoothnessMode::FullGradient && t + 1 < n {
        let wn = hp.snapshot_weight(t + 1, n);
        num.scaled_add(hp.lambda * wn, &*state.v[t + 1]);
        den.scaled_add(hp.lambda * wn, vt);
    }
    DenseFactor::new(sqrt_ratio_update(vt, &num, &den))
}

/// New value of `U` given the temporary factors.
pub fn update_u(pairs: &[SimilarityPair], state: &FactorState, hp: &HyperParams) -> Result<DenseFactor> {
    check_problem(pairs, state)?;
    let n = pairs.len();
    let u = &*state.u;
    let mut num = Array2::<f64>::zeros(u.dim());
    let mut den = Array2::<f64>::zeros(u.dim());
    for (t, (p, vt)) in pairs.iter().zip(&state.v).enumerate() {
        let wt = hp.snapshot_weight(t, n);
        num.scaled_add(wt, &p.w.mul_dense(vt)?);
        den.scaled_add(wt, &u.dot(&vt.t().dot(&**vt)));
        if hp.gamma != 0.0 {
            num.scaled_add(hp.gamma, &p.h.mul_dense(u)?);
            let dh = p.h.row_sums();
            for (i, mut row) in den.outer_iter_mut().enumerate() {
                row.scaled_add(hp.gamma * dh[i], &u.row(i));
            }
        }
    }
    DenseFactor::new(sqrt_ratio_update(u, &num, &den))
}

fn check_dims(pairs: &[SimilarityPair], hp: &HyperParams) -> Result<usize> {
    hp.validate()?;
    let first = pairs.first().ok_or_else(|| Error::EmptyInput("no similarity pairs".into()))?;
    let (n, c) = first.w.shape();
    if n != c {
        return Err(Error::Shape {
            op: "fit",
            left: (n, c),
            right: (c, n),
        });
    }
    if hp.m > n {
        return Err(Error::InvalidParam(format!(
            "representation dimension m = {} exceeds node count {n}",
            hp.m
        )));
    }
    Ok(n)
}

/// Randomly initializes the factors from `hp.seed` and iterates.
pub fn fit(pairs: &[SimilarityPair], hp: &HyperParams) -> Result<FactorState> {
    let n = check_dims(pairs, hp)?;
    fit_from(pairs, hp, FactorState::random(n, hp.m, pairs.len(), hp.seed))
}

/// Iterates from a given state until convergence or `hp.max_iters`.
///
/// Emits `iter=<n> objective=<value> rel_change=<value>` at debug level
/// after every iteration.
pub fn fit_from(pairs: &[SimilarityPair], hp: &HyperParams, mut state: FactorState) -> Result<FactorState> {
    check_dims(pairs, hp)?;
    check_problem(pairs, &state)?;
    let mut prev = objective(pairs, &state, hp)?;
    state.objective_trace = vec![prev];
    state.iters_run = 0;
    state.converged = false;
    for iter in 1..=hp.max_iters {
        for t in 0..pairs.len() {
            state.v[t] = update_v(t, pairs, &state, hp)?;
        }
        state.u = update_u(pairs, &state, hp)?;
        let obj = objective(pairs, &state, hp)?;
        if !obj.is_finite() {
            return Err(Error::Numerical(format!("objective became {obj} at iteration {iter}")));
        }
        let rel_change = (prev - obj).abs() / prev.abs().max(f64::MIN_POSITIVE);
        log::debug!("iter={iter} objective={obj} rel_change={rel_change}");
        state.objective_trace.push(obj);
        state.iters_run = iter;
        prev = obj;
        if rel_change < hp.rel_tol || obj == 0.0 {
            state.converged = true;
            break;
        }
    }
    Ok(state)
}
