//! Fit driving-laser parameters to a target coupling distribution.
//!
//! Mirrored laser pairs leave two knobs each: the positive two-photon
//! detuning `𝒟_{2m}` (which sets the kernel decay length) and the drive
//! ratio `G_{2m} = |Ω/Δ|` (which sets the pair's weight). Since only odd
//! ring distances survive the pairing and the target is specified as
//! ratios `J(l)/J(1)` spanning several orders of magnitude, the objective
//! compares log-ratios:
//!
//! ```text
//! residual = Σ_{l in l_fit} w_l (ln[J(l)/J(1)] - ln[J*(l)/J*(1)])².
//! ```
//!
//! Minimization is a derivative-free simplex descent over
//! `(𝒟_{2m}, ln G_{2m})` from low-discrepancy multi-starts; the overall
//! drive scale is a gauge direction (ratios are scale-free) and is fixed by
//! convention only when lasers are materialized.

use serde::Serialize;

use crate::coupling::{
    laser_pair, s_kernel_finite, AtomSpec, CavityArray, CouplingTable, DriveLaser,
    RESONANCE_GUARD,
};
use crate::error::{Error, Result};

/// One mirrored laser pair: positive detuning `𝒟/T` and drive ratio
/// `G = |Ω/Δ|` shared by both members.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairParams {
    pub d: f64,
    pub g: f64,
}

/// Specification of a coupling-ratio fit.
#[derive(Debug, Clone)]
pub struct FitProblem {
    /// Number of mirrored pairs (`n_L / 2`).
    pub n_pairs: usize,
    /// Target distribution; only the ratios `J(l)/J(1)` matter, and the
    /// table's ring size fixes the kernel evaluation ring.
    pub target: CouplingTable,
    /// Odd distances entering the objective.
    pub l_fit: Vec<usize>,
    /// Bounds for `𝒟/T`, respecting the band-resonance guard.
    pub bounds: (f64, f64),
    /// Per-distance weights, same length as `l_fit`.
    pub weights: Vec<f64>,
}

impl FitProblem {
    /// Equal-weight problem with the default detuning box `[2.05, 60]`.
    pub fn new(n_pairs: usize, target: CouplingTable, l_fit: Vec<usize>) -> Result<Self> {
        let weights = vec![1.0; l_fit.len()];
        Self::with_options(n_pairs, target, l_fit, (2.05, 60.0), weights)
    }

    pub fn with_options(
        n_pairs: usize,
        target: CouplingTable,
        l_fit: Vec<usize>,
        bounds: (f64, f64),
        weights: Vec<f64>,
    ) -> Result<Self> {
        if n_pairs == 0 {
            return Err(Error::InvalidInput("fit needs at least one laser pair".into()));
        }
        if l_fit.is_empty() {
            return Err(Error::InvalidInput("l_fit must be nonempty".into()));
        }
        if weights.len() != l_fit.len() || weights.iter().any(|w| !(*w > 0.0)) {
            return Err(Error::InvalidInput(
                "weights must be positive and match l_fit".into(),
            ));
        }
        let edge = 2.0 * (1.0 + RESONANCE_GUARD);
        if !(bounds.0 > edge) {
            return Err(Error::InvalidInput(format!(
                "lower detuning bound {} must exceed the band edge {edge}",
                bounds.0
            )));
        }
        for &l in &l_fit {
            if l % 2 == 0 {
                return Err(Error::InvalidInput(format!(
                    "l_fit distance {l} is even; paired couplings vanish there"
                )));
            }
            if l > target.max_l() || target.ratio_to_j1(l) <= 0.0 {
                return Err(Error::InvalidInput(format!(
                    "target has no positive ratio at distance {l}"
                )));
            }
        }
        Ok(Self { n_pairs, target, l_fit, bounds, weights })
    }
}

/// Best parameters found by [`fit_drives`].
#[derive(Debug, Clone, Serialize)]
pub struct FitResult {
    /// Pairs sorted by descending detuning (pair permutation is a gauge).
    pub pairs: Vec<PairParams>,
    pub residual: f64,
    /// Coupling table of the returned pairs at unit atom-cavity coupling;
    /// equals `paired_coupling_table` of the materialized lasers up to the
    /// overall `|g|²` scale.
    pub achieved: CouplingTable,
    pub iterations: usize,
    pub converged: bool,
}

/// Paired coupling table of raw `(𝒟, G)` parameters at `|g| = 1`, on an
/// `n_sites` ring with `t_hop = 1`.
fn achieved_table(params: &[PairParams], n_sites: usize) -> Result<CouplingTable> {
    let array = CavityArray::new(n_sites, 1.0, 0.0)?;
    let mut j = vec![0.0; n_sites / 2 + 1];
    for p in params {
        if !(p.g > 0.0 && p.g.is_finite()) {
            return Err(Error::InvalidInput(format!("pair drive ratio {} invalid", p.g)));
        }
        for (l, jl) in j.iter_mut().enumerate() {
            if l % 2 == 1 {
                *jl += 0.5 * p.g * p.g * s_kernel_finite(&array, p.d, 0, l)?.abs();
            }
        }
    }
    CouplingTable::new(n_sites, j)
}

/// Weighted log-ratio residual of `params` against the problem's target.
pub fn evaluate_objective(params: &[PairParams], problem: &FitProblem) -> Result<f64> {
    if params.len() != problem.n_pairs {
        return Err(Error::InvalidInput(format!(
            "expected {} pairs, got {}",
            problem.n_pairs,
            params.len()
        )));
    }
    let achieved = achieved_table(params, problem.target.n_sites)?;
    let mut residual = 0.0;
    for (&l, &w) in problem.l_fit.iter().zip(&problem.weights) {
        let r = achieved.ratio_to_j1(l);
        let r_target = problem.target.ratio_to_j1(l);
        let diff = r.ln() - r_target.ln();
        residual += w * diff * diff;
    }
    Ok(residual)
}

// ---- deterministic multi-start machinery ----

const LN_G_BOUNDS: (f64, f64) = (-4.0, 4.0);
const HALTON_BASES: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Radical-inverse (Halton) value of `index` in the given base, in (0, 1).
fn halton(mut index: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while index > 0 {
        f /= base as f64;
        r += f * (index % base) as f64;
        index /= base;
    }
    r
}

struct SimplexOutcome {
    x: Vec<f64>,
    value: f64,
    iterations: usize,
    converged: bool,
}

/// Nelder-Mead descent with deterministic tie-breaks. Converged when the
/// simplex diameter falls below `diam_tol` in bound-scaled coordinates.
fn nelder_mead(
    f: &dyn Fn(&[f64]) -> f64,
    x0: &[f64],
    lo: &[f64],
    hi: &[f64],
    max_iter: usize,
    diam_tol: f64,
) -> SimplexOutcome {
    let dim = x0.len();
    let scale: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| b - a).collect();

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
    simplex.push(x0.to_vec());
    for i in 0..dim {
        let mut v = x0.to_vec();
        let step = 0.05 * scale[i];
        v[i] = if v[i] + step <= hi[i] { v[i] + step } else { v[i] - step };
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| f(v)).collect();

    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        iterations += 1;
        let mut order: Vec<usize> = (0..=dim).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
        let best = order[0];
        let worst = order[dim];
        let second_worst = order[dim - 1];

        let diameter = simplex
            .iter()
            .map(|v| {
                v.iter()
                    .zip(&simplex[best])
                    .zip(&scale)
                    .map(|((a, b), s)| ((a - b) / s).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if diameter < diam_tol {
            converged = true;
            break;
        }

        let mut centroid = vec![0.0; dim];
        for &i in order.iter().take(dim) {
            for (c, x) in centroid.iter_mut().zip(&simplex[i]) {
                *c += x;
            }
        }
        centroid.iter_mut().for_each(|c| *c /= dim as f64);

        let lerp = |from: &[f64], toward: &[f64], t: f64| -> Vec<f64> {
            from.iter().zip(toward).map(|(a, b)| a + t * (b - a)).collect()
        };

        // Reflection.
        let reflected = lerp(&simplex[worst], &centroid, 2.0);
        let f_r = f(&reflected);
        if f_r < values[best] {
            // Expansion.
            let expanded = lerp(&simplex[worst], &centroid, 3.0);
            let f_e = f(&expanded);
            if f_e < f_r {
                simplex[worst] = expanded;
                values[worst] = f_e;
            } else {
                simplex[worst] = reflected;
                values[worst] = f_r;
            }
            continue;
        }
        if f_r < values[second_worst] {
            simplex[worst] = reflected;
            values[worst] = f_r;
            continue;
        }
        // Contraction (outside if the reflection improved on the worst).
        let contracted = if f_r < values[worst] {
            lerp(&simplex[worst], &centroid, 1.5)
        } else {
            lerp(&simplex[worst], &centroid, 0.5)
        };
        let f_c = f(&contracted);
        if f_c < values[worst].min(f_r) {
            simplex[worst] = contracted;
            values[worst] = f_c;
            continue;
        }
        // Shrink toward the best vertex.
        for &i in order.iter().skip(1) {
            simplex[i] = lerp(&simplex[i], &simplex[best], 0.5);
            values[i] = f(&simplex[i]);
        }
    }

    let (best_idx, _) = values
        .iter()
        .enumerate()
        .min_by(|(ia, a), (ib, b)| a.total_cmp(b).then(ia.cmp(ib)))
        .unwrap();
    SimplexOutcome {
        x: simplex[best_idx].clone(),
        value: values[best_idx],
        iterations,
        converged,
    }
}

fn unpack(x: &[f64]) -> Vec<PairParams> {
    x.chunks_exact(2)
        .map(|c| PairParams { d: c[0], g: c[1].exp() })
        .collect()
}

/// Multi-start simplex fit. Deterministic for a given `(problem, starts,
/// seed)`: starts come from a seed-offset Halton sequence, each descent is
/// deterministic, and the reduction breaks ties lexicographically.
pub fn fit_drives(problem: &FitProblem, starts: usize, seed: u64) -> Result<FitResult> {
    let (d_lo, d_hi) = problem.bounds;
    if !(d_lo < d_hi) {
        return Err(Error::NoFeasibleStart);
    }
    let starts = starts.max(1);
    let dim = 2 * problem.n_pairs;
    if dim > HALTON_BASES.len() {
        return Err(Error::InvalidInput(format!(
            "at most {} pairs supported",
            HALTON_BASES.len() / 2
        )));
    }

    let mut lo = Vec::with_capacity(dim);
    let mut hi = Vec::with_capacity(dim);
    for _ in 0..problem.n_pairs {
        lo.push(d_lo);
        hi.push(d_hi);
        lo.push(LN_G_BOUNDS.0);
        hi.push(LN_G_BOUNDS.1);
    }

    // Out-of-box points get a smooth penalty so the simplex slides back in;
    // kernel errors cannot occur inside the box.
    let objective = |x: &[f64]| -> f64 {
        let mut outside = 0.0;
        for ((v, l), h) in x.iter().zip(&lo).zip(&hi) {
            if *v < *l {
                outside += (l - v) * (l - v);
            } else if *v > *h {
                outside += (v - h) * (v - h);
            }
        }
        if outside > 0.0 {
            return 1e30 * (1.0 + outside);
        }
        evaluate_objective(&unpack(x), problem).unwrap_or(1e30)
    };

    let index_offset = 1 + splitmix64(seed) % 8192;
    let mut best: Option<SimplexOutcome> = None;
    for s in 0..starts {
        let idx = index_offset + s as u64;
        let x0: Vec<f64> = (0..dim)
            .map(|d| {
                let u = halton(idx, HALTON_BASES[d]);
                lo[d] + u * (hi[d] - lo[d])
            })
            .collect();
        // A second descent from the first result tightens stalled simplices.
        let mut out = nelder_mead(&objective, &x0, &lo, &hi, 4000, 1e-12);
        let total = out.iterations;
        out = nelder_mead(&objective, &out.x, &lo, &hi, 4000, 1e-12);
        out.iterations += total;

        let better = match &best {
            None => true,
            Some(b) => match out.value.total_cmp(&b.value) {
                std::cmp::Ordering::Less => true,
                std::cmp::Ordering::Greater => false,
                std::cmp::Ordering::Equal => {
                    // Lexicographic tie-break on the parameter vector.
                    out.x
                        .iter()
                        .zip(&b.x)
                        .find_map(|(a, c)| match a.total_cmp(c) {
                            std::cmp::Ordering::Equal => None,
                            ord => Some(ord == std::cmp::Ordering::Less),
                        })
                        .unwrap_or(false)
                }
            },
        };
        if better {
            best = Some(out);
        }
    }

    let best = best.expect("at least one start");
    let mut pairs = unpack(&best.x);
    pairs.sort_by(|a, b| b.d.total_cmp(&a.d));
    let achieved = achieved_table(&pairs, problem.target.n_sites)?;
    Ok(FitResult {
        pairs,
        residual: best.value,
        achieved,
        iterations: best.iterations,
        converged: best.converged,
    })
}

// ---- built-in drive presets ----

/// Drive-pair presets: `"nL2"` is a single pair at `𝒟 = 10T/3`; `"nL4"`
/// adds a second pair (`𝒟 = 20T` and `34T/15`, drive-ratio quotient
/// `6√14`). The absolute drive scale is fixed so that `max G = 0.05`,
/// leaving validity headroom.
pub fn paper_presets(name: &str) -> Result<Vec<PairParams>> {
    const G_MAX: f64 = 0.05;
    match name {
        "nL2" => Ok(vec![PairParams { d: 10.0 / 3.0, g: G_MAX }]),
        "nL4" => {
            let quotient = 6.0 * 14.0_f64.sqrt();
            Ok(vec![
                PairParams { d: 20.0, g: G_MAX },
                PairParams { d: 34.0 / 15.0, g: G_MAX / quotient },
            ])
        }
        other => Err(Error::UnknownPreset(other.to_string())),
    }
}

/// Materialize a preset on an `n_sites` ring with the canonical frequency
/// gauge (`t_hop = 1`, `ω_ab = 0`, `ω_c = 200`, `|g| = 0.01`). The
/// atom-cavity detuning `ω_e - ω_c` is chosen per preset so the default
/// validity gate passes with the largest attainable worst margin.
pub fn preset_system(
    name: &str,
    n_sites: usize,
) -> Result<(CavityArray, AtomSpec, Vec<DriveLaser>)> {
    let pairs = paper_presets(name)?;
    let atom_detuning = match name {
        "nL2" => 100.0,
        // The slow pair sits 4T/15 from the band edge while the fast pair
        // splits the laser frequencies by 40T; 68T balances the two
        // binding inequalities at G = 0.05 (worst margin ~ 1.2).
        "nL4" => 68.0,
        _ => unreachable!("paper_presets validated the name"),
    };
    let array = CavityArray::new(n_sites, 1.0, 200.0)?;
    let atom = AtomSpec::new(
        array.omega_c + atom_detuning,
        0.0,
        num_complex::Complex64::new(0.01, 0.0),
    )?;
    let mut lasers = Vec::with_capacity(2 * pairs.len());
    for p in &pairs {
        let (plus, minus) = laser_pair(&array, &atom, p.d, p.g)?;
        lasers.push(plus);
        lasers.push(minus);
    }
    Ok((array, atom, lasers))
}
