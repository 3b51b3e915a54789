use serde::Serialize;

use super::constants::{max_mesh, MeshLimit};
use super::{SandwichConfig, SandwichKind};

/// Lattice resolution per axis for the spot checks.
const LATTICE: usize = 64;
/// Relative slack for inequalities that hold with equality at lattice points.
const REL_SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckMethod {
    /// Decided exactly from the parameters.
    Exact,
    /// Evaluated on a deterministic lattice; never a proof.
    SpotChecked,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckEntry {
    /// Assumption label, e.g. `A3` or `B1`.
    pub code: String,
    pub label: String,
    pub method: CheckMethod,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub kind: SandwichKind,
    pub entries: Vec<CheckEntry>,
    pub mesh: MeshLimit,
    pub delta: f64,
}

impl ValidationReport {
    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckEntry> {
        self.entries.iter().filter(|e| !e.passed)
    }

    pub fn entry(&self, code: &str, label: &str) -> Option<&CheckEntry> {
        self.entries
            .iter()
            .find(|e| e.code == code && e.label == label)
    }
}

struct Report {
    prefix: char,
    entries: Vec<CheckEntry>,
}

impl Report {
    fn push(&mut self, n: u8, label: &str, method: CheckMethod, passed: bool, detail: String) {
        let code = if n == 0 {
            "lambda".to_string()
        } else {
            format!("{}{}", self.prefix, n)
        };
        self.entries.push(CheckEntry {
            code,
            label: label.to_string(),
            method,
            passed,
            detail,
        });
    }
}

/// Checks (A1)–(A4) or (B1)–(B4) for a configuration.
///
/// Parameter inequalities are decided exactly. The Lipschitz, repulsion and
/// derivative inequalities are evaluated on 65×65 lattices over the sets at
/// distance `ε ∈ {y*/4, y*/2, y*}` from the bounds and are labelled
/// [`CheckMethod::SpotChecked`]. Failures are entries, not errors.
pub fn validate_assumptions(config: &SandwichConfig) -> ValidationReport {
    let drift = config.drift();
    let bounds = config.bounds();
    let c = *drift.constants();
    let lambda = bounds.holder_exponent();
    let horizon = config.horizon();
    let kind = config.kind();
    let two_sided = kind == SandwichKind::TwoSided;
    let mut r = Report {
        prefix: if two_sided { 'B' } else { 'A' },
        entries: Vec::new(),
    };
    use CheckMethod::*;

    r.push(
        0,
        "holder exponent",
        Exact,
        lambda > 0.0 && lambda < 1.0,
        format!("λ = {lambda}"),
    );

    // (1) initial value
    let y0 = config.y0();
    let phi0 = bounds.phi(0.0);
    let (ok, detail) = match bounds.psi(0.0) {
        Some(psi0) => (
            phi0 < y0 && y0 < psi0,
            format!("φ(0) = {phi0} < Y(0) = {y0} < ψ(0) = {psi0}"),
        ),
        None => (phi0 < y0, format!("φ(0) = {phi0} < Y(0) = {y0}")),
    };
    r.push(1, "initial value", Exact, ok, detail);

    // bound functions: ordering and Hölder constant
    if two_sided {
        let gap = bounds.min_gap();
        r.push(1, "bound ordering", Exact, gap > 0.0, format!("min (ψ − φ) = {gap}"));
    }
    let (ratio, k) = holder_ratio(config);
    r.push(
        1,
        "bound holder constant",
        SpotChecked,
        ratio <= k * (1.0 + REL_SLACK) + 1e-14,
        format!("max sampled |Δφ|+|Δψ| / |Δt|^λ = {ratio:.6} vs K = {k:.6}"),
    );

    let epsilons = lattice_epsilons(config);

    // (2) Lipschitz-type regularity
    r.push(
        2,
        "lipschitz constants",
        Exact,
        c.c1 > 0.0 && c.p > 1.0,
        format!("c1 = {}, p = {}", c.c1, c.p),
    );
    let mut worst = 0.0f64;
    let mut checked = 0usize;
    for &eps in &epsilons {
        let lat = Lattice::build(config, eps);
        let bound = c.c1 / eps.powf(c.p);
        let mut check = |a: (f64, f64, f64), b: (f64, f64, f64)| {
            let (t1, y1, b1) = a;
            let (t2, y2, b2) = b;
            let rhs = bound * ((y1 - y2).abs() + (t1 - t2).abs().powf(lambda));
            if rhs > 0.0 {
                worst = worst.max((b1 - b2).abs() / rhs);
            } else if b1 != b2 {
                worst = f64::INFINITY;
            }
            checked += 1;
        };
        for i in 0..=LATTICE {
            for j in 0..=LATTICE {
                let Some(p) = lat.get(i, j) else { continue };
                for (di, dj) in [(1, 0), (0, 1), (1, 1)] {
                    if let Some(q) = lat.get(i + di, j + dj) {
                        check(p, q);
                    }
                }
            }
        }
        let coarse: Vec<_> = (0..=LATTICE)
            .step_by(4)
            .flat_map(|i| (0..=LATTICE).step_by(4).map(move |j| (i, j)))
            .filter_map(|(i, j)| lat.get(i, j))
            .collect();
        for (n, &p) in coarse.iter().enumerate() {
            for &q in &coarse[n + 1..] {
                check(p, q);
            }
        }
    }
    r.push(
        2,
        "lipschitz bound",
        SpotChecked,
        worst.is_finite() && worst <= 1.0 + REL_SLACK,
        format!(
            "{checked} pairs over ε ∈ {epsilons:.4?}, max |Δb| / (c1/εᵖ(|Δy|+|Δt|^λ)) = {worst:.6}"
        ),
    );

    // (3) repulsion from the bounds
    let threshold = 1.0 / lambda - 1.0;
    r.push(
        3,
        "power",
        Exact,
        c.gamma > threshold,
        format!("γ = {} vs 1/λ − 1 = {threshold:.6}", c.gamma),
    );
    let (viol, samples) = repulsion_violations(config);
    r.push(
        3,
        "repulsion",
        SpotChecked,
        c.c2 > 0.0 && c.y_star > 0.0 && viol == 0,
        format!(
            "c2 = {}, y* = {}, {viol} violations in {samples} samples",
            c.c2, c.y_star
        ),
    );

    // (4) one-sided derivative bound
    let mut sup_dy = f64::NEG_INFINITY;
    for &eps in &epsilons {
        let lat = Lattice::build(config, eps);
        for i in 0..=LATTICE {
            for j in 0..=LATTICE {
                if let Some((t, y, _)) = lat.get(i, j) {
                    sup_dy = sup_dy.max(drift.dy(t, y));
                }
            }
        }
    }
    r.push(
        4,
        "derivative bound",
        SpotChecked,
        c.c3 > 0.0 && sup_dy < c.c3,
        format!("c3 = {}, max sampled ∂b/∂y = {sup_dy:.6}", c.c3),
    );

    let mesh = max_mesh(config);
    let delta = config.mesh();
    r.push(
        4,
        "mesh condition",
        Exact,
        mesh.admits(delta),
        format!("Δ_N = {delta:e} vs Δ_max = {:e} ({:?})", mesh.delta_max, mesh.binding),
    );

    let _ = horizon;
    ValidationReport {
        kind,
        entries: r.entries,
        mesh,
        delta,
    }
}

/// `ε ∈ {y*/4, y*/2, y*}`, kept inside the range where the Lipschitz
/// assumption is stated.
fn lattice_epsilons(config: &SandwichConfig) -> Vec<f64> {
    let y_star = config.drift().constants().y_star;
    let bounds = config.bounds();
    let mut cap = 1.0f64;
    if bounds.is_two_sided() {
        // strictly below half the smallest gap keeps every lattice column non-empty
        cap = cap.min(0.5 * bounds.min_gap());
    }
    [0.25, 0.5, 1.0]
        .iter()
        .map(|f| {
            let e = f * y_star;
            if e >= cap {
                0.999 * cap * f
            } else {
                e
            }
        })
        .filter(|e| *e > 0.0 && e.is_finite())
        .collect()
}

/// 65×65 lattice of `(t, y, b(t,y))` over the points at distance at least `ε`
/// from the bounds. One-sided lattices extend `4·max(1, Y(0)−φ(0))` above
/// `φ + ε`.
struct Lattice {
    points: Vec<Option<(f64, f64, f64)>>,
}

impl Lattice {
    fn build(config: &SandwichConfig, eps: f64) -> Self {
        let drift = config.drift();
        let bounds = config.bounds();
        let horizon = config.horizon();
        let span_one_sided = 4.0 * (config.y0() - bounds.phi(0.0)).abs().max(1.0);
        let mut points = Vec::with_capacity((LATTICE + 1) * (LATTICE + 1));
        for i in 0..=LATTICE {
            let t = horizon * i as f64 / LATTICE as f64;
            let lo = bounds.phi(t) + eps;
            let span = match bounds.psi(t) {
                Some(psi) => psi - eps - lo,
                None => span_one_sided,
            };
            for j in 0..=LATTICE {
                if span < 0.0 {
                    points.push(None);
                    continue;
                }
                let y = lo + span * j as f64 / LATTICE as f64;
                points.push(drift.in_domain(t, y).then(|| (t, y, drift.value(t, y))));
            }
        }
        Lattice { points }
    }

    fn get(&self, i: usize, j: usize) -> Option<(f64, f64, f64)> {
        if i > LATTICE || j > LATTICE {
            return None;
        }
        self.points[i * (LATTICE + 1) + j]
    }
}

fn repulsion_violations(config: &SandwichConfig) -> (usize, usize) {
    let drift = config.drift();
    let bounds = config.bounds();
    let c = drift.constants();
    let horizon = config.horizon();
    let (mut viol, mut samples) = (0, 0);
    for i in 0..=LATTICE {
        let t = horizon * i as f64 / LATTICE as f64;
        let (lo, hi) = drift.interval(t);
        for j in 1..=LATTICE {
            let u = c.y_star * j as f64 / LATTICE as f64;
            let floor = c.c2 / u.powf(c.gamma);
            let y = lo + u;
            if drift.in_domain(t, y) {
                samples += 1;
                if drift.value(t, y) < floor * (1.0 - REL_SLACK) {
                    viol += 1;
                }
            }
            if bounds.is_two_sided() {
                let y = hi - u;
                if drift.in_domain(t, y) {
                    samples += 1;
                    if drift.value(t, y) > -floor * (1.0 - REL_SLACK) {
                        viol += 1;
                    }
                }
            }
        }
    }
    (viol, samples)
}

/// Largest sampled `(|Δφ| + |Δψ|)/|Δt|^λ` on 257 points, and the declared `K`.
fn holder_ratio(config: &SandwichConfig) -> (f64, f64) {
    const N: usize = 256;
    let bounds = config.bounds();
    let horizon = config.horizon();
    let lambda = bounds.holder_exponent();
    let ts: Vec<f64> = (0..=N).map(|i| horizon * i as f64 / N as f64).collect();
    let phi: Vec<f64> = ts.iter().map(|&t| bounds.phi(t)).collect();
    let psi: Vec<f64> = ts.iter().map(|&t| bounds.psi(t).unwrap_or(0.0)).collect();
    let mut worst = 0.0f64;
    for i in 0..=N {
        for j in (i + 1)..=N {
            let num = (phi[j] - phi[i]).abs() + (psi[j] - psi[i]).abs();
            worst = worst.max(num / (ts[j] - ts[i]).powf(lambda));
        }
    }
    (worst, bounds.holder_constant())
}
