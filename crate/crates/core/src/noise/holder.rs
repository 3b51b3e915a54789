use serde::Serialize;

use super::NoisePath;

/// Largest grid for which the automatic mode scans every pair.
pub const EXACT_HOLDER_MAX_N: usize = 4096;
/// Gaps scanned exhaustively by the restricted mode.
const DENSE_GAPS: usize = 512;
/// Geometric gaps per octave above [`DENSE_GAPS`].
const GAPS_PER_OCTAVE: f64 = 8.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HolderMode {
    /// Every pair of grid points.
    Exact,
    /// All gaps up to 512 steps plus 8 geometric gaps per octave beyond.
    /// A lower bound on the exact value.
    Dyadic,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HolderEstimate {
    pub value: f64,
    pub mode: HolderMode,
}

/// `Λ̂ = max_{k<n} |Z(t_n) − Z(t_k)| / (t_n − t_k)^λ`, exact for
/// `N ≤ 4096` and gap-restricted above.
pub fn holder_constant(path: &NoisePath, lambda: f64) -> f64 {
    holder_estimate(&path.values, path.grid.delta(), lambda, None).value
}

/// Λ̂ for grid values with spacing `delta`; `mode = None` picks by size.
pub fn holder_estimate(
    values: &[f64],
    delta: f64,
    lambda: f64,
    mode: Option<HolderMode>,
) -> HolderEstimate {
    let n = values.len().saturating_sub(1);
    let mode = mode.unwrap_or(if n <= EXACT_HOLDER_MAX_N {
        HolderMode::Exact
    } else {
        HolderMode::Dyadic
    });
    let gaps: Vec<usize> = match mode {
        HolderMode::Exact => (1..=n).collect(),
        HolderMode::Dyadic => restricted_gaps(n),
    };
    let mut best = 0.0f64;
    for g in gaps {
        let mut inc = 0.0f64;
        for k in 0..=(n - g) {
            inc = inc.max((values[k + g] - values[k]).abs());
        }
        best = best.max(inc / (g as f64 * delta).powf(lambda));
    }
    HolderEstimate { value: best, mode }
}

fn restricted_gaps(n: usize) -> Vec<usize> {
    let mut gaps: Vec<usize> = (1..=n.min(DENSE_GAPS)).collect();
    let mut j = 1.0;
    loop {
        let g = (DENSE_GAPS as f64 * 2f64.powf(j / GAPS_PER_OCTAVE)).round() as usize;
        if g >= n {
            break;
        }
        if g > *gaps.last().unwrap() {
            gaps.push(g);
        }
        j += 1.0;
    }
    if n > DENSE_GAPS {
        gaps.push(n);
    }
    gaps
}
