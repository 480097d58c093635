//! End-to-end acceptance checks. Each test prints one `acceptance NN name:
//! PASS/FAIL` line so the whole gate can be read off a single run of
//! `cargo test --test acceptance -- --nocapture`.

use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sme_core::{estimate_wmax_lower, ucb_sme_fit, DiameterMethod, MembershipSet};
use sysid_sim::{simulate, DisturbanceModel, InputPolicy, SystemModel};
use theory_bounds::{choose_m, derive_constants, sme_failure_bound, BmsbParams};

use exp_cli::config::ExperimentConfig;
use exp_cli::runner;

fn report(num: u32, name: &str, pass: bool, detail: &str) {
    println!(
        "acceptance {num:02} {name}: {}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "acceptance {num:02} {name} failed: {detail}");
}

fn preset(name: &str) -> ExperimentConfig {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("configs")
        .join(format!("{name}.toml"));
    ExperimentConfig::load(&path).expect("preset config parses")
}

/// Least-squares slope of ln(y) against ln(x).
fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|&(x, _)| x.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|&(_, y)| y.max(1e-300).ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    cov / var
}

fn median(mut values: Vec<f64>) -> f64 {
    values.sort_by(|a, b| a.total_cmp(b));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Reads a CSV written by the runner: skips the `#` meta line, returns the
/// header fields and the data rows.
fn read_csv(path: &PathBuf) -> (Vec<String>, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(path).expect("csv exists");
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header: Vec<String> = lines
        .next()
        .expect("header")
        .split(',')
        .map(str::to_string)
        .collect();
    let rows = lines
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect();
    (header, rows)
}

fn col(header: &[String], name: &str) -> usize {
    header
        .iter()
        .position(|h| h == name)
        .unwrap_or_else(|| panic!("column {name} missing"))
}

// ---------------------------------------------------------------------------
// Criteria 1 + 2 share one batch of runs: scalar system, uniform
// disturbances, sample sizes 2^5..2^12, 20 seeds.

struct RateData {
    /// Power-of-two grid points with the per-seed (membership, least-squares)
    /// diameters.
    grid: Vec<usize>,
    per_t: Vec<Vec<(f64, f64)>>,
    /// Per-seed (membership, least-squares) diameters at T = 250.
    at_250: Vec<(f64, f64)>,
}

fn rate_data() -> &'static RateData {
    static DATA: OnceLock<RateData> = OnceLock::new();
    DATA.get_or_init(|| {
        let model = SystemModel::new(
            DMatrix::from_row_slice(1, 1, &[0.8]),
            DMatrix::from_row_slice(1, 1, &[1.0]),
        )
        .unwrap();
        let dist = DisturbanceModel::uniform(1.0, 1);
        let policy = InputPolicy::IidBounded(DisturbanceModel::uniform(1.0, 1));
        let s_bound = model.theta().norm();
        let proxy = lse_baseline::variance_proxy_for(&dist.kind);

        let grid: Vec<usize> = (5..=12).map(|p| 1usize << p).collect();
        let mut full = grid.clone();
        full.push(250);
        full.sort_unstable();

        let mut per_t = vec![Vec::new(); grid.len()];
        let mut at_250 = Vec::new();
        for seed in 0..20 {
            let traj = simulate(&model, &policy, &dist, &DVector::zeros(1), 4096, seed).unwrap();
            let sme = runner::sme_diameters_on_grid(
                &traj,
                dist.w_max,
                &full,
                DiameterMethod::ExactVertex,
                0,
                None,
            )
            .unwrap();
            for point in &sme {
                let region =
                    lse_baseline::ay_region(&traj.prefix(point.t), 0.1, 0.1, s_bound, proxy)
                        .unwrap();
                let pair = (point.diameter, region.diameter());
                if point.t == 250 {
                    at_250.push(pair);
                } else {
                    let idx = grid.iter().position(|&t| t == point.t).unwrap();
                    per_t[idx].push(pair);
                }
            }
        }
        RateData {
            grid,
            per_t,
            at_250,
        }
    })
}

#[test]
fn acceptance_01_membership_diameter_rate() {
    let data = rate_data();
    let points: Vec<(f64, f64)> = data
        .grid
        .iter()
        .zip(&data.per_t)
        .map(|(&t, pairs)| (t as f64, median(pairs.iter().map(|p| p.0).collect())))
        .collect();
    let slope = log_log_slope(&points);
    report(
        1,
        "membership diameter decays like 1/T",
        (-1.3..=-0.7).contains(&slope),
        &format!("slope = {slope:.3}"),
    );
}

#[test]
fn acceptance_02_least_squares_rate_and_ordering() {
    let data = rate_data();
    let points: Vec<(f64, f64)> = data
        .grid
        .iter()
        .zip(&data.per_t)
        .map(|(&t, pairs)| (t as f64, median(pairs.iter().map(|p| p.1).collect())))
        .collect();
    let slope = log_log_slope(&points);
    let wins = data.at_250.iter().filter(|(sme, lse)| sme < lse).count();
    report(
        2,
        "least-squares decays like 1/sqrt(T) and is wider at T=250",
        (-0.65..=-0.35).contains(&slope) && wins >= 16,
        &format!("slope = {slope:.3}, membership narrower in {wins}/20 seeds"),
    );
}

#[test]
fn acceptance_03_true_parameter_containment() {
    let model = SystemModel::new(
        DMatrix::from_row_slice(1, 1, &[0.8]),
        DMatrix::from_row_slice(1, 1, &[1.0]),
    )
    .unwrap();
    let dist = DisturbanceModel::uniform(1.0, 1);
    let policy = InputPolicy::IidBounded(DisturbanceModel::uniform(1.0, 1));
    let grid = [8usize, 32, 128, 512];
    let mut misses = 0usize;
    for seed in 0..100 {
        let traj = simulate(&model, &policy, &dist, &DVector::zeros(1), 512, seed).unwrap();
        let points = runner::sme_diameters_on_grid(
            &traj,
            dist.w_max,
            &grid,
            DiameterMethod::AxisBox,
            0,
            Some(model.theta()),
        )
        .unwrap();
        misses += points
            .iter()
            .filter(|p| !p.contains_truth || p.infeasible)
            .count();
    }
    report(
        3,
        "true parameter is in the set with the truthful bound",
        misses == 0,
        &format!("{misses} containment misses"),
    );
}

#[test]
fn acceptance_04_disturbance_bound_estimate_converges() {
    let config = preset("inflated-jet");
    let model = config.system_model().unwrap();
    let dist = config.disturbance_model(model.n_x()).unwrap();
    let policy = config.input_policy(model.n_u()).unwrap();
    let grid = [32usize, 64, 128, 256, 512, 1000];

    let mut gaps_per_t: Vec<Vec<f64>> = vec![Vec::new(); grid.len()];
    let mut monotone = true;
    let mut nonnegative = true;
    let mut ucb_covers = 0usize;
    let mut worst = String::new();
    for seed in 0..10 {
        let traj = simulate(&model, &policy, &dist, &DVector::zeros(model.n_x()), 1000, seed)
            .unwrap();
        let mut prev = f64::INFINITY;
        for (idx, &t) in grid.iter().enumerate() {
            let fit = estimate_wmax_lower(&traj.prefix(t)).unwrap();
            let gap = dist.w_max - fit.w_bar;
            if gap < -1e-7 {
                nonnegative = false;
                worst = format!("seed {seed} t {t}: gap {gap:.3e}");
            }
            if gap > prev + 1e-7 {
                monotone = false;
                worst = format!("seed {seed} t {t}: gap grew {prev:.3e} -> {gap:.3e}");
            }
            prev = gap;
            gaps_per_t[idx].push(gap.max(0.0));
        }
        let ucb = ucb_sme_fit(&traj, 0.01).unwrap();
        if ucb.w_hat >= dist.w_max {
            ucb_covers += 1;
        }
    }
    let points: Vec<(f64, f64)> = grid
        .iter()
        .zip(&gaps_per_t)
        .map(|(&t, gaps)| (t as f64, median(gaps.clone())))
        .collect();
    let slope = log_log_slope(&points);
    report(
        4,
        "residual-based disturbance bound tightens at rate 1/T",
        nonnegative && monotone && slope <= -0.7 && ucb_covers >= 8,
        &format!(
            "nonnegative={nonnegative} monotone={monotone} slope={slope:.3} \
             inflated bound covers in {ucb_covers}/10 ({worst})"
        ),
    );
}

#[test]
fn acceptance_05_inflated_bounds_order_diameters() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = preset("inflated-jet");
    config.out_dir = dir.path().to_path_buf();
    let summary = runner::run_experiment(&config).unwrap();
    let (header, rows) = read_csv(&summary.files[0]);
    let (c_seed, c_t, c_mult, c_diam) = (
        col(&header, "seed"),
        col(&header, "t"),
        col(&header, "multiplier"),
        col(&header, "diameter"),
    );
    use std::collections::BTreeMap;
    let mut by_key: BTreeMap<(u64, usize), Vec<(f64, f64)>> = BTreeMap::new();
    for row in &rows {
        let key = (row[c_seed].parse().unwrap(), row[c_t].parse().unwrap());
        by_key
            .entry(key)
            .or_default()
            .push((row[c_mult].parse().unwrap(), row[c_diam].parse().unwrap()));
    }
    let mut ordered = true;
    let mut detail = String::new();
    for ((seed, t), mut series) in by_key {
        series.sort_by(|a, b| a.0.total_cmp(&b.0));
        for pair in series.windows(2) {
            if pair[1].1 < pair[0].1 * (1.0 - 1e-9) {
                ordered = false;
                detail = format!(
                    "seed {seed} t {t}: x{} diameter {:.3e} < x{} diameter {:.3e}",
                    pair[1].0, pair[1].1, pair[0].0, pair[0].1
                );
            }
        }
    }
    report(
        5,
        "larger assumed bounds give pointwise larger sets",
        ordered,
        &detail,
    );
}

/// Independent vertex oracle for a bounded 2-d polytope: intersect every
/// halfspace pair by Cramer's rule, keep feasible points, take the widest
/// pairwise distance.
fn pairwise_vertex_diameter(poly: &sme_core::RowPolytope) -> f64 {
    let hs = &poly.halfspaces;
    let mut verts: Vec<[f64; 2]> = Vec::new();
    for i in 0..hs.len() {
        for j in i + 1..hs.len() {
            let (a, b) = (&hs[i], &hs[j]);
            let det = a.normal[0] * b.normal[1] - a.normal[1] * b.normal[0];
            if det.abs() < 1e-12 {
                continue;
            }
            let x = (a.offset * b.normal[1] - b.offset * a.normal[1]) / det;
            let y = (a.normal[0] * b.offset - b.normal[0] * a.offset) / det;
            let feasible = hs.iter().all(|h| {
                h.normal[0] * x + h.normal[1] * y <= h.offset + 1e-9 * (1.0 + h.offset.abs())
            });
            if feasible {
                verts.push([x, y]);
            }
        }
    }
    let mut best = 0.0f64;
    for p in 0..verts.len() {
        for q in p + 1..verts.len() {
            let d = ((verts[p][0] - verts[q][0]).powi(2)
                + (verts[p][1] - verts[q][1]).powi(2))
            .sqrt();
            best = best.max(d);
        }
    }
    best
}

#[test]
fn acceptance_06_diameter_methods_agree_on_planar_sets() {
    let mut ok = true;
    let mut detail = String::new();
    for case in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + case);
        let theta = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let mut set = MembershipSet::new(1, 2, 0.5);
        for _ in 0..40 {
            let z = DVector::from_vec(vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]);
            let w: f64 = rng.gen_range(-0.5..0.5);
            let x_next = DVector::from_vec(vec![theta[0] * z[0] + theta[1] * z[1] + w]);
            set.update(&z, &x_next).unwrap();
        }
        let exact = set.diameter(DiameterMethod::ExactVertex, 0).unwrap().value;
        let sampled = set
            .diameter(DiameterMethod::SupportSampled, 128)
            .unwrap()
            .value;
        let axis = set.diameter(DiameterMethod::AxisBox, 0).unwrap().value;
        let oracle = pairwise_vertex_diameter(set.row(0));
        if !(exact.is_finite()
            && sampled >= 0.99 * exact - 1e-12
            && exact <= axis * (1.0 + 1e-9)
            && (exact - oracle).abs() <= 1e-9 * (1.0 + oracle))
        {
            ok = false;
            detail = format!(
                "case {case}: exact={exact:.6e} sampled={sampled:.6e} \
                 axis={axis:.6e} oracle={oracle:.6e}"
            );
        }
    }
    report(6, "diameter methods agree on planar sets", ok, &detail);
}

#[test]
fn acceptance_07_minimax_fit_matches_grid_search() {
    let mut ok = true;
    let mut detail = String::new();
    for case in 0..30u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(2000 + case);
        let a = rng.gen_range(-0.9..0.9);
        let w_max = rng.gen_range(0.2..1.5);
        let model = SystemModel::autonomous(DMatrix::from_row_slice(1, 1, &[a])).unwrap();
        let dist = DisturbanceModel::uniform(w_max, 1);
        let traj = simulate(
            &model,
            &InputPolicy::None,
            &dist,
            &DVector::from_vec(vec![1.0]),
            60,
            case,
        )
        .unwrap();
        let fit = estimate_wmax_lower(&traj).unwrap();

        // Nested grid search over the scalar coefficient.
        let objective = |theta: f64| -> f64 {
            traj.steps
                .iter()
                .map(|s| (s.x_next[0] - theta * s.z[0]).abs())
                .fold(0.0f64, f64::max)
        };
        let (mut lo, mut hi) = (-5.0f64, 5.0f64);
        let mut best = (f64::INFINITY, 0.0);
        for _ in 0..4 {
            let n = 4000;
            for k in 0..=n {
                let theta = lo + (hi - lo) * k as f64 / n as f64;
                let v = objective(theta);
                if v < best.0 {
                    best = (v, theta);
                }
            }
            let width = (hi - lo) / n as f64 * 2.0;
            lo = best.1 - width;
            hi = best.1 + width;
        }
        if (fit.w_bar - best.0).abs() > 1e-4 {
            ok = false;
            detail = format!("case {case}: fit {:.8} vs grid {:.8}", fit.w_bar, best.0);
        }
    }
    report(7, "minimax residual matches grid-search oracle", ok, &detail);
}

// ---------------------------------------------------------------------------
// Criterion 8: plainly coded duplicates of the failure-bound formulas.

struct DupConstants {
    a1: f64,
    a2: f64,
    a3: f64,
    a4: f64,
    a5: f64,
}

fn dup_constants(sigma_z: f64, p_z: f64, b_z: f64, n_x: usize) -> DupConstants {
    let a1 = sigma_z * p_z / 4.0;
    DupConstants {
        a1,
        a2: 64.0 * (b_z / (sigma_z * p_z)).powi(2),
        a3: p_z * p_z / 8.0,
        a4: 4.0 * b_z * (n_x as f64).sqrt() / a1,
        a5: 4.0 / a1,
    }
}

fn dup_q(dist: &DisturbanceModel, eps: f64) -> f64 {
    if eps <= 0.0 {
        return 0.0;
    }
    if eps >= 2.0 * dist.w_max {
        return 1.0;
    }
    let raw = match dist.kind {
        sysid_sim::DisturbanceKind::UniformBox => eps / (2.0 * dist.w_max),
        sysid_sim::DisturbanceKind::TruncatedGaussian { sigma } => {
            let gauss = (2.0 * std::f64::consts::PI).sqrt() * sigma;
            eps * (-dist.w_max * dist.w_max / (2.0 * sigma * sigma)).exp()
                / gauss.min(2.0 * dist.w_max)
        }
        sysid_sim::DisturbanceKind::BoundaryUniform => 0.5 / dist.dim as f64,
    };
    raw.min(1.0)
}

/// (log term1, log term2) of the diameter failure bound.
fn dup_log_terms(
    delta: f64,
    t_len: usize,
    m: usize,
    c: &DupConstants,
    n_x: usize,
    n_z: usize,
    dist: &DisturbanceModel,
) -> (f64, f64) {
    let blocks = ((t_len + m - 1) / m) as f64;
    let (nx, nz) = (n_x as f64, n_z as f64);
    let lt1 = 544f64.ln() + blocks.ln() + 2.5 * nz.ln() + (c.a2 * nz).ln().ln()
        + nz * c.a2.ln()
        - c.a3 * m as f64;
    let q = dup_q(dist, c.a1 * delta / (4.0 * nx.sqrt()));
    let base = if q >= 1.0 {
        f64::NEG_INFINITY
    } else {
        (1.0 - q).ln()
    };
    let lt2 = 544f64.ln()
        + 2.5 * nx.ln()
        + 2.5 * nz.ln()
        + (c.a4 * nx * nz).ln().ln()
        + nx * nz * c.a4.ln()
        + blocks * base;
    (lt1, lt2)
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    if a == b || (a.is_infinite() && b.is_infinite() && a.signum() == b.signum()) {
        return true;
    }
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

#[test]
fn acceptance_08_bound_formulas_match_duplicate_evaluator() {
    let mut points = 0usize;
    let mut ok = true;
    let mut detail = String::new();
    let dists = [
        DisturbanceModel::uniform(1.0, 2),
        DisturbanceModel::truncated_gaussian(2.0, 1.0, 2),
        DisturbanceModel::boundary_uniform(1.0, 2),
    ];
    for &sigma_z in &[0.3, 1.0] {
        for &p_z in &[0.4, 1.0] {
            for &b_z in &[1.0, 3.0] {
                for &n_x in &[1usize, 3] {
                    for &n_u in &[0usize, 2] {
                        for dist in &dists {
                          for &(delta, t_len, m) in
                              &[(0.4, 5000usize, 40usize), (1.1, 900, 25)]
                          {
                            points += 1;
                            let n_z = n_x + n_u;
                            let params = BmsbParams::new(sigma_z, p_z, b_z).unwrap();
                            let lib = derive_constants(&params, n_x, n_u);
                            let dup = dup_constants(sigma_z, p_z, b_z, n_x);
                            let consts_match = close(lib.a1, dup.a1, 1e-10)
                                && close(lib.a2, dup.a2, 1e-10)
                                && close(lib.a3, dup.a3, 1e-10)
                                && close(lib.a4, dup.a4, 1e-10)
                                && close(lib.a5, dup.a5, 1e-10);

                            let r = sme_failure_bound(delta, t_len, m, &lib, dist).unwrap();
                            let (lt1, lt2) =
                                dup_log_terms(delta, t_len, m, &dup, n_x, n_z, dist);
                            let terms_match = close(r.log_term1, lt1, 1e-10)
                                && close(r.log_term2, lt2, 1e-10);

                            let (_, log_cov) = theory_bounds::covering_bound(n_z, 0.05).unwrap();
                            let dup_cov = 544f64.ln()
                                + 2.5 * (n_z as f64).ln()
                                + (n_z as f64 / 0.05).ln().ln()
                                + n_z as f64 * 20f64.ln();
                            let cov_match = close(log_cov, dup_cov, 1e-10);

                            let b_reg = 2.0;
                            let w = theory_bounds::wmax_failure_bound(
                                delta, t_len, m, &lib, dist, b_reg,
                            )
                            .unwrap();
                            let (wl1, wl2) = dup_log_terms(
                                delta / (2.0 * b_reg),
                                t_len,
                                m,
                                &dup,
                                n_x,
                                n_z,
                                dist,
                            );
                            let qh = dup_q(dist, delta / 2.0);
                            let wt5 = if qh >= 1.0 {
                                0.0
                            } else {
                                (t_len as f64 * (1.0 - qh).ln()).exp()
                            };
                            let wmax_match = close(
                                w.total,
                                (wl1.exp() + wl2.exp() + wt5).min(1.0),
                                1e-10,
                            );

                            let eps = 0.1;
                            let m_star = choose_m(t_len, eps, &lib).unwrap();
                            let (sound_lt1, _) = dup_log_terms(
                                delta,
                                t_len.max(m_star + 1),
                                m_star,
                                &dup,
                                n_x,
                                n_z,
                                dist,
                            );
                            let m_sound = sound_lt1 <= eps.ln() + 1e-12;

                            if !(consts_match
                                && terms_match
                                && cov_match
                                && wmax_match
                                && m_sound)
                            {
                                ok = false;
                                detail = format!(
                                    "sigma_z={sigma_z} p_z={p_z} b_z={b_z} n_x={n_x} \
                                     n_u={n_u} dist={:?}: consts={consts_match} \
                                     terms={terms_match} cov={cov_match} \
                                     wmax={wmax_match} m_sound={m_sound}",
                                    dist.kind
                                );
                            }
                          }
                        }
                    }
                }
            }
        }
    }
    report(
        8,
        "failure-bound formulas match duplicate evaluator",
        ok && points >= 100,
        &format!("{points} grid points checked; {detail}"),
    );
}

#[test]
fn acceptance_09_bound_dominates_monte_carlo_failure_rate() {
    let config = preset("bounds-table");
    let model = config.system_model().unwrap();
    let dist = config.disturbance_model(model.n_x()).unwrap();
    let bc = config.bounds.as_ref().unwrap();
    let params = BmsbParams::new(bc.sigma_z, bc.p_z, bc.b_z).unwrap();
    let consts = derive_constants(&params, model.n_x(), model.n_u());

    let seeds = 200u64;
    let max_t = *bc.t_values.last().unwrap();
    // One streamed set per seed; diameters recorded at every checkpoint.
    let mut diam_at: Vec<Vec<f64>> = vec![Vec::new(); bc.t_values.len()];
    for seed in 0..seeds {
        let traj = simulate(
            &model,
            &InputPolicy::None,
            &dist,
            &DVector::zeros(model.n_x()),
            max_t,
            seed,
        )
        .unwrap();
        let points = runner::sme_diameters_on_grid(
            &traj,
            dist.w_max,
            &bc.t_values,
            DiameterMethod::AxisBox,
            0,
            None,
        )
        .unwrap();
        for (idx, p) in points.iter().enumerate() {
            diam_at[idx].push(p.diameter);
        }
    }

    let mut ok = true;
    let mut checked = 0usize;
    let mut detail = String::new();
    for &delta in &bc.deltas {
        for (idx, &t) in bc.t_values.iter().enumerate() {
            let m = choose_m(t, bc.eps, &consts)
                .unwrap()
                .min(t - 1)
                .max(1);
            let r = sme_failure_bound(delta, t, m, &consts, &dist).unwrap();
            if r.vacuous {
                continue;
            }
            checked += 1;
            let failures = diam_at[idx]
                .iter()
                .filter(|&&d| d >= delta - 1e-12)
                .count();
            let freq = failures as f64 / seeds as f64;
            let slack = 3.0 * (r.total * (1.0 - r.total) / seeds as f64).sqrt();
            if freq > r.total + slack {
                ok = false;
                detail = format!(
                    "delta={delta} t={t}: empirical {freq:.4} > bound {:.4e} + {slack:.4e}",
                    r.total
                );
            }
        }
    }
    report(
        9,
        "failure bound dominates Monte-Carlo failure rate",
        ok && checked > 0,
        &format!("{checked} non-vacuous grid points; {detail}"),
    );
}

#[test]
fn acceptance_10_tracking_demo_is_safe_and_competitive() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = preset("tracking-tube");
    config.out_dir = dir.path().to_path_buf();
    let summary = runner::run_experiment(&config).unwrap();
    let (header, rows) = read_csv(&summary.files[0]);
    let c_viol = col(&header, "violations");
    let c_win = col(&header, "sme_not_worse");
    let violations: usize = rows.iter().map(|r| r[c_viol].parse::<usize>().unwrap()).sum();
    let wins = rows.iter().filter(|r| r[c_win] == "1").count();
    report(
        10,
        "tube controller stays safe and membership estimate competes",
        violations == 0 && wins >= 7,
        &format!("{violations} violations, membership not worse in {wins}/{}", rows.len()),
    );
}

#[test]
fn acceptance_11_dimension_sweep_completes() {
    let start = std::time::Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let mut config = preset("dim-sweep");
    config.out_dir = dir.path().to_path_buf();
    config.dims = vec![5, 10, 15, 20];
    let summary = runner::run_experiment(&config).unwrap();
    let (header, rows) = read_csv(&summary.files[0]);
    let c_diam = col(&header, "sme_diameter");
    let all_finite = rows
        .iter()
        .all(|r| r[c_diam].parse::<f64>().unwrap().is_finite());
    let elapsed = start.elapsed();
    report(
        11,
        "dimension sweep emits the diameter table in time",
        rows.len() == 40 && all_finite && elapsed.as_secs() < 600,
        &format!("{} rows, finite={all_finite}, {elapsed:.0?}", rows.len()),
    );
}
