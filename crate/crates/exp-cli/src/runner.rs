//! Experiment drivers. Every experiment fans out over seeds, logs one CSV
//! row per measurement, and stamps the config digest into the file header
//! so rows are traceable.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use sme_core::{ucb_sme_fit, DiameterMethod, MembershipSet};
use sysid_sim::{simulate, SystemModel, Trajectory};
use theory_bounds::{choose_m, derive_constants, sme_failure_bound, BmsbParams};

use crate::config::ExperimentConfig;
use crate::ExpError;

#[derive(Debug, Clone)]
pub struct Summary {
    pub experiment: String,
    pub config_hash: String,
    pub files: Vec<PathBuf>,
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<Summary, ExpError> {
    config.validate()?;
    std::fs::create_dir_all(&config.out_dir)?;
    let files = match config.id.as_str() {
        "rates-toy" | "custom" => run_estimator_comparison(config)?,
        "inflated-jet" => run_inflated_bounds(config)?,
        "dim-sweep" => run_dimension_sweep(config)?,
        "tracking-tube" => run_tracking(config)?,
        "bounds-table" => run_bounds_table(config)?,
        other => return Err(ExpError::Config(format!("unknown experiment '{other}'"))),
    };
    Ok(Summary {
        experiment: config.id.clone(),
        config_hash: config.hash(),
        files,
    })
}

fn open_csv(
    path: &Path,
    config: &ExperimentConfig,
    header: &str,
) -> Result<BufWriter<File>, ExpError> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "# experiment={} config_hash={}", config.id, config.hash())?;
    writeln!(out, "{header}")?;
    Ok(out)
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.total_cmp(b));
    let n = values.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

fn std_dev(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64).sqrt()
}

/// Streams a trajectory into a membership set, reporting the diameter at
/// each requested sample count. Streaming and prefix replay agree because
/// the sets are nested.
pub struct GridPoint {
    pub t: usize,
    pub diameter: f64,
    pub infeasible: bool,
    pub contains_truth: bool,
}

pub fn sme_diameters_on_grid(
    traj: &Trajectory,
    w_bound: f64,
    grid: &[usize],
    method: DiameterMethod,
    budget: usize,
    theta_star: Option<&DMatrix<f64>>,
) -> Result<Vec<GridPoint>, ExpError> {
    let mut set = MembershipSet::new(traj.n_x, traj.n_z(), w_bound);
    let mut out = Vec::with_capacity(grid.len());
    let mut next = 0;
    for (t, step) in traj.steps.iter().enumerate() {
        set.update(&step.z, &step.x_next)?;
        while next < grid.len() && grid[next] == t + 1 {
            let diameter = set.diameter(method, budget)?.value;
            out.push(GridPoint {
                t: t + 1,
                diameter,
                infeasible: set.any_infeasible(),
                contains_truth: theta_star.map(|th| set.contains(th)).unwrap_or(false),
            });
            next += 1;
        }
    }
    Ok(out)
}

fn theta_frobenius(model: &SystemModel) -> f64 {
    model.theta().norm()
}

/// Shared estimator comparison: membership set with the truthful bound, the
/// data-driven inflated variant, and the least-squares ellipsoid.
fn run_estimator_comparison(config: &ExperimentConfig) -> Result<Vec<PathBuf>, ExpError> {
    let model = config.system_model()?;
    let dist = config.disturbance_model(model.n_x())?;
    let policy = config.input_policy(model.n_u())?;
    let lse_cfg = config.lse.clone().unwrap_or_default();
    let method = config.diameter_method();
    let budget = config.diameter_budget.unwrap_or(128);
    let theta_star = model.theta();
    let s_bound = theta_frobenius(&model);
    let proxy = lse_baseline::variance_proxy_for(&dist.kind);
    let max_t = *config.t_grid.last().ok_or_else(|| {
        ExpError::Config("estimator comparison needs a sample-size grid".into())
    })?;

    let data_path = config.out_dir.join("estimators.csv");
    let mut out = open_csv(
        &data_path,
        config,
        "seed,t,sme_diameter,ucb_diameter,lse_diameter,w_bar,w_hat,sme_contains,lse_contains",
    )?;
    let mut per_t: Vec<Vec<[f64; 3]>> = vec![Vec::new(); config.t_grid.len()];

    for seed in 0..config.seeds {
        let traj = simulate(&model, &policy, &dist, &config.x0(model.n_x()), max_t, seed)?;
        let sme = sme_diameters_on_grid(
            &traj,
            dist.w_max,
            &config.t_grid,
            method,
            budget,
            Some(theta_star),
        )?;
        for (idx, &t) in config.t_grid.iter().enumerate() {
            let prefix = traj.prefix(t);
            let mut ucb = ucb_sme_fit(&prefix, config.beta)?;
            let ucb_diam = ucb.set.diameter(method, budget)?.value;
            let region =
                lse_baseline::ay_region(&prefix, lse_cfg.lambda, lse_cfg.delta, s_bound, proxy)?;
            let lse_diam = region.diameter();
            let sme_diam = sme[idx].diameter;
            let sme_contains = sme[idx].contains_truth;
            let lse_contains = region.contains(&theta_star);
            writeln!(
                out,
                "{seed},{t},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e},{},{}",
                sme_diam,
                ucb_diam,
                lse_diam,
                ucb.w_bar,
                ucb.w_hat,
                sme_contains as u8,
                lse_contains as u8
            )?;
            per_t[idx].push([sme_diam, ucb_diam, lse_diam]);
        }
    }
    out.flush()?;

    let summary_path = config.out_dir.join("estimators_summary.csv");
    let mut sum = open_csv(
        &summary_path,
        config,
        "t,sme_median,sme_std,ucb_median,ucb_std,lse_median,lse_std",
    )?;
    for (idx, &t) in config.t_grid.iter().enumerate() {
        let mut cols: Vec<(f64, f64)> = Vec::new();
        for c in 0..3 {
            let mut vals: Vec<f64> = per_t[idx].iter().map(|r| r[c]).collect();
            let sd = std_dev(&vals);
            cols.push((median(&mut vals), sd));
        }
        writeln!(
            sum,
            "{t},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e}",
            cols[0].0, cols[0].1, cols[1].0, cols[1].1, cols[2].0, cols[2].1
        )?;
    }
    sum.flush()?;
    Ok(vec![data_path, summary_path])
}

/// Membership sets built with deliberately inflated disturbance bounds: the
/// diameters must order with the inflation factor.
fn run_inflated_bounds(config: &ExperimentConfig) -> Result<Vec<PathBuf>, ExpError> {
    let model = config.system_model()?;
    let dist = config.disturbance_model(model.n_x())?;
    let policy = config.input_policy(model.n_u())?;
    let method = config.diameter_method();
    let budget = config.diameter_budget.unwrap_or(128);
    let multipliers = if config.w_hat_multipliers.is_empty() {
        vec![1.0, 2.0, 3.0, 5.0, 10.0]
    } else {
        config.w_hat_multipliers.clone()
    };
    let max_t = *config
        .t_grid
        .last()
        .ok_or_else(|| ExpError::Config("inflated-bound sweep needs a sample-size grid".into()))?;
    let theta_star = model.theta();

    let data_path = config.out_dir.join("inflated.csv");
    let mut out = open_csv(
        &data_path,
        config,
        "seed,t,multiplier,diameter,contains",
    )?;
    for seed in 0..config.seeds {
        let traj = simulate(&model, &policy, &dist, &config.x0(model.n_x()), max_t, seed)?;
        for &mult in &multipliers {
            let w = mult * dist.w_max;
            let rows = sme_diameters_on_grid(
                &traj,
                w,
                &config.t_grid,
                method,
                budget,
                Some(theta_star),
            )?;
            for p in rows {
                writeln!(
                    out,
                    "{seed},{},{mult},{:.10e},{}",
                    p.t, p.diameter, p.contains_truth as u8
                )?;
            }
        }
    }
    out.flush()?;
    Ok(vec![data_path])
}

/// Random stable system of a given dimension, spectral radius rescaled.
pub fn random_system(n_x: usize, spectral_radius: f64, seed: u64) -> SystemModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (n_x as u64).wrapping_mul(0x9E37_79B9)) ;
    rng.set_stream(7);
    let mut a = DMatrix::from_fn(n_x, n_x, |_, _| rng.sample::<f64, _>(StandardNormal));
    let rho = a
        .complex_eigenvalues()
        .iter()
        .map(|e| e.norm())
        .fold(0.0f64, f64::max);
    if rho > 0.0 {
        a *= spectral_radius / rho;
    }
    SystemModel::autonomous(a).expect("square matrix")
}

fn run_dimension_sweep(config: &ExperimentConfig) -> Result<Vec<PathBuf>, ExpError> {
    let dims = if config.dims.is_empty() {
        vec![5, 10, 15, 20, 25]
    } else {
        config.dims.clone()
    };
    let t_len = config.t_grid.last().copied().unwrap_or(1000);
    let lse_cfg = config.lse.clone().unwrap_or_default();
    let budget = config.diameter_budget.unwrap_or(128);

    let data_path = config.out_dir.join("dimensions.csv");
    let mut out = open_csv(
        &data_path,
        config,
        "n_x,seed,sme_diameter,ucb_diameter,lse_diameter,w_bar,contains",
    )?;
    for &n_x in &dims {
        let dist = config.disturbance_model(n_x)?;
        for seed in 0..config.seeds {
            let model = random_system(n_x, 0.9, seed);
            let traj = simulate(
                &model,
                &sysid_sim::InputPolicy::None,
                &dist,
                &DVector::zeros(n_x),
                t_len,
                seed,
            )?;
            let mut set = MembershipSet::from_trajectory(&traj, dist.w_max)?;
            let sme_diam = set.diameter(DiameterMethod::AxisBox, budget)?.value;
            let contains = set.contains(&model.theta());
            let mut ucb = ucb_sme_fit(&traj, config.beta)?;
            let ucb_diam = ucb.set.diameter(DiameterMethod::AxisBox, budget)?.value;
            let proxy = lse_baseline::variance_proxy_for(&dist.kind);
            let region = lse_baseline::ay_region(
                &traj,
                lse_cfg.lambda,
                lse_cfg.delta,
                theta_frobenius(&model),
                proxy,
            )?;
            writeln!(
                out,
                "{n_x},{seed},{:.10e},{:.10e},{:.10e},{:.10e},{}",
                sme_diam,
                ucb_diam,
                region.diameter(),
                ucb.w_bar,
                contains as u8
            )?;
        }
    }
    out.flush()?;
    Ok(vec![data_path])
}

fn run_tracking(config: &ExperimentConfig) -> Result<Vec<PathBuf>, ExpError> {
    let rc = config
        .rampc
        .as_ref()
        .ok_or_else(|| ExpError::Config("missing [rampc] section".into()))?;
    let task = rampc_demo::TrackingTask {
        q_weight: rc.q_weight,
        r_weight: rc.r_weight,
        x_max: rc.x_max,
        u_max: rc.u_max,
        episode_len: rc.episode_len,
        ..rampc_demo::TrackingTask::default()
    };
    let mpc = rampc_demo::TubeMpcConfig {
        horizon: rc.horizon,
        gain: rc.gain,
        eta_max: rc.eta_max,
        w_max: rc.w_max,
        theta0: rampc_demo::ModelInterval {
            a_lo: rc.theta0[0],
            a_hi: rc.theta0[1],
            b_lo: rc.theta0[2],
            b_hi: rc.theta0[3],
        },
    };
    let theta_star = (rc.a_star, rc.b_star);

    let mut files = Vec::new();
    let summary_path = config.out_dir.join("tracking_summary.csv");
    let mut sum = open_csv(
        &summary_path,
        config,
        "seed,opt_cost,sme_cost,lse_cost,sme_gap,lse_gap,violations,sme_not_worse",
    )?;
    for seed in 0..config.seeds {
        let opt = rampc_demo::run_tracking_episode(
            &task,
            &mpc,
            rampc_demo::EstimatorKind::Oracle,
            theta_star,
            seed,
        )?;
        let sme = rampc_demo::run_tracking_episode(
            &task,
            &mpc,
            rampc_demo::EstimatorKind::Sme,
            theta_star,
            seed,
        )?;
        let lse = rampc_demo::run_tracking_episode(
            &task,
            &mpc,
            rampc_demo::EstimatorKind::Lse,
            theta_star,
            seed,
        )?;
        let mut violations = 0usize;
        for log in [&opt, &sme, &lse] {
            violations += log
                .rows
                .iter()
                .filter(|r| r.x.abs() > task.x_max + 1e-9 || r.u.abs() > task.u_max + 1e-9)
                .count();
        }
        let sme_gap = sme.tail_gap(&opt, 100);
        let lse_gap = lse.tail_gap(&opt, 100);
        writeln!(
            sum,
            "{seed},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e},{violations},{}",
            opt.total_cost(),
            sme.total_cost(),
            lse.total_cost(),
            sme_gap,
            lse_gap,
            (sme_gap <= lse_gap) as u8
        )?;
        for log in [&opt, &sme, &lse] {
            let name = match log.estimator {
                rampc_demo::EstimatorKind::Oracle => "oracle",
                rampc_demo::EstimatorKind::Sme => "sme",
                rampc_demo::EstimatorKind::Lse => "lse",
            };
            let path = config.out_dir.join(format!("episode_{name}_{seed}.csv"));
            log.write_csv(BufWriter::new(File::create(&path)?))?;
            files.push(path);
        }
    }
    sum.flush()?;
    files.insert(0, summary_path);
    Ok(files)
}

fn run_bounds_table(config: &ExperimentConfig) -> Result<Vec<PathBuf>, ExpError> {
    let bc = config
        .bounds
        .as_ref()
        .ok_or_else(|| ExpError::Config("missing [bounds] section".into()))?;
    let model = config.system_model()?;
    let dist = config.disturbance_model(model.n_x())?;
    let params = BmsbParams::new(bc.sigma_z, bc.p_z, bc.b_z)?;
    let consts = derive_constants(&params, model.n_x(), model.n_u());

    let data_path = config.out_dir.join("bounds.csv");
    let mut out = open_csv(
        &data_path,
        config,
        "delta,t,m,term1,term2,total,vacuous",
    )?;
    for &delta in &bc.deltas {
        for &t in &bc.t_values {
            let m = choose_m(t, bc.eps, &consts)?.min(t.saturating_sub(1)).max(1);
            if t <= m {
                continue;
            }
            let r = sme_failure_bound(delta, t, m, &consts, &dist)?;
            writeln!(
                out,
                "{delta},{t},{m},{:.10e},{:.10e},{:.10e},{}",
                r.term1,
                r.term2,
                r.total,
                r.vacuous as u8
            )?;
        }
    }
    out.flush()?;
    Ok(vec![data_path])
}
