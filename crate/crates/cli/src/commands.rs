use rayon::prelude::*;

use qarrow_core::crooksfit::{fit_durations, log_ratio_points, CrooksFitResult, DurationGroup, FitMode};
use qarrow_core::export::{
    append_trajectory, identity_table, series_table, spectrum_table, trajectory_table, CsvTable,
};
use qarrow_core::interferometer::{
    expected_locations, fit_peaks, fitted_distribution, inverse_dft, simulate_ramsey, NoiseModel,
};
use qarrow_core::quench::{quasistatic_trajectory, trajectory, uniform_grid, QuenchProtocol};
use qarrow_core::workstats::{
    entropy_distribution, linear_response_sigma, mean_sigma, sigma_equals_kl_check,
    tpm_work_distribution, WorkDistribution,
};

use crate::config::ExperimentConfig;
use crate::{CliError, Report};

/// Largest identity deviation accepted before `identity` exits with a tolerance failure.
pub const IDENTITY_TOL: f64 = 1e-6;
/// Extra durations bracketing the sweep: near-sudden and near-adiabatic.
pub const SUDDEN_TAU_US: f64 = 0.1;
pub const ADIABATIC_TAU_US: f64 = 50_000.0;

fn tau_label(tau_us: f64) -> String {
    format!("tau{tau_us}us")
}

pub fn run_identity(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let beta = cfg.beta()?;
    let s = cfg.settings();
    let reports = cfg
        .tau_list_us
        .par_iter()
        .map(|&tau| {
            let p = cfg.protocol(tau)?;
            let grid = uniform_grid(p.tau(), cfg.n_time_points);
            Ok(sigma_equals_kl_check(&p, beta, &s, &grid)?)
        })
        .collect::<Result<Vec<_>, CliError>>()?;

    let worst = reports.iter().map(|r| r.max_deviation).fold(0.0, f64::max);
    let mut report = Report {
        files: vec![("identity.csv".into(), identity_table(&reports).render())],
        summary: vec![format!("largest deviation {worst:e} over {} durations", reports.len())],
        ..Default::default()
    };
    if !(worst <= IDENTITY_TOL) {
        report.failure = Some(CliError::Tolerance(format!(
            "identity deviation {worst:e} exceeds {IDENTITY_TOL:e}"
        )));
    }
    Ok(report)
}

pub fn run_figure3(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let beta = cfg.beta()?;
    let s = cfg.settings();
    let n = cfg.n_time_points;
    let files = cfg
        .tau_list_us
        .par_iter()
        .map(|&tau| {
            let p = cfg.protocol(tau)?;
            let mut t = trajectory_table(&trajectory(&p.forward(), beta, n, &s)?);
            append_trajectory(&mut t, "B", &trajectory(&p.backward(), beta, n, &s)?);
            append_trajectory(&mut t, "QF", &quasistatic_trajectory(&p.forward(), beta, n)?);
            append_trajectory(&mut t, "QB", &quasistatic_trajectory(&p.backward(), beta, n)?);
            Ok((format!("fig3_{}.csv", tau_label(tau)), t.render()))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(Report { files, ..Default::default() })
}

pub fn run_figure4a(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let beta = cfg.beta()?;
    let s = cfg.settings();
    let rows = cfg
        .tau_list_us
        .par_iter()
        .map(|&tau| {
            let p = cfg.protocol(tau)?;
            let wd = tpm_work_distribution(&p, beta, &s)?;
            Ok((tau, entropy_distribution(&wd, beta, wd.free_energy_difference(beta))))
        })
        .collect::<Result<Vec<_>, CliError>>()?;

    let mut t = CsvTable::new(&["tau_us", "W_hkHz", "sigma", "probability"]);
    for (tau, ed) in &rows {
        for pt in &ed.points {
            t.push(vec![(*tau).into(), pt.work.into(), pt.sigma.into(), pt.probability.into()]);
        }
    }
    let summary = rows
        .iter()
        .map(|(tau, ed)| format!("tau {tau} us: <sigma> = {:.6}", mean_sigma(ed)))
        .collect();
    Ok(Report { files: vec![("fig4a.csv".into(), t.render())], summary, ..Default::default() })
}

/// Index pairs `(i, i+1)` of the configured sweep where `⟨Σ⟩` increases.
pub fn monotonicity_breaks(sweep: &[(f64, f64)]) -> Vec<usize> {
    (0..sweep.len().saturating_sub(1))
        .filter(|&i| sweep[i + 1].1 > sweep[i].1)
        .collect()
}

pub fn run_figure4c(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let beta = cfg.beta()?;
    let s = cfg.settings();
    let mut taus = cfg.tau_list_us.clone();
    taus.push(SUDDEN_TAU_US);
    taus.push(ADIABATIC_TAU_US);
    taus.sort_by(f64::total_cmp);
    taus.dedup();

    let rows = taus
        .par_iter()
        .map(|&tau| {
            let p = cfg.protocol(tau)?;
            let wd = tpm_work_distribution(&p, beta, &s)?;
            let df = wd.free_energy_difference(beta);
            Ok((tau, mean_sigma(&entropy_distribution(&wd, beta, df)), linear_response_sigma(&wd, beta)))
        })
        .collect::<Result<Vec<_>, CliError>>()?;

    let mut t = CsvTable::new(&["tau_us", "mean_sigma", "mean_sigma_lr"]);
    for (tau, sigma, lr) in &rows {
        t.push(vec![(*tau).into(), (*sigma).into(), (*lr).into()]);
    }

    let mut configured: Vec<(f64, f64)> = rows
        .iter()
        .filter(|(tau, _, _)| cfg.tau_list_us.contains(tau))
        .map(|&(tau, sigma, _)| (tau, sigma))
        .collect();
    configured.sort_by(|a, b| a.0.total_cmp(&b.0));
    let advisories = monotonicity_breaks(&configured)
        .into_iter()
        .map(|i| {
            format!(
                "<sigma> rises from {:.6} at {} us to {:.6} at {} us",
                configured[i].1,
                configured[i].0,
                configured[i + 1].1,
                configured[i + 1].0
            )
        })
        .collect();
    Ok(Report { files: vec![("fig4c.csv".into(), t.render())], advisories, ..Default::default() })
}

fn noise_for(cfg: &ExperimentConfig, stream: u64) -> Option<NoiseModel> {
    (cfg.noise_sigma > 0.0).then_some(NoiseModel { sigma: cfg.noise_sigma, seed: cfg.seed, stream })
}

/// Interferometric work distribution of one direction; each (τ, direction)
/// pair draws from its own noise stream.
fn measured(cfg: &ExperimentConfig, p: &QuenchProtocol, stream: u64) -> Result<WorkDistribution, CliError> {
    let series = simulate_ramsey(p, cfg.beta()?, &cfg.u_grid(), noise_for(cfg, stream).as_ref(), &cfg.settings())?;
    let fit = fit_peaks(&series, expected_locations(p))?;
    Ok(fitted_distribution(&fit, p)?)
}

const FIT_COLUMNS: [&str; 7] = [
    "tau_us",
    "W_hkHz",
    "log_ratio",
    "fit_slope",
    "fit_intercept",
    "stderr_slope",
    "stderr_intercept",
];

fn push_fit_rows(t: &mut CsvTable, tau_us: f64, group: &DurationGroup, fit: &CrooksFitResult) {
    for pt in &group.points {
        t.push(vec![
            tau_us.into(),
            pt.work.into(),
            pt.log_ratio.into(),
            fit.beta_est.into(),
            fit.intercept().into(),
            fit.stderr_slope.into(),
            fit.stderr_intercept.into(),
        ]);
    }
}

pub fn run_crooks(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let groups = cfg
        .tau_list_us
        .par_iter()
        .enumerate()
        .map(|(k, &tau)| {
            let p = cfg.protocol(tau)?;
            let f = measured(cfg, &p.forward(), 2 * k as u64)?;
            let b = measured(cfg, &p.backward(), 2 * k as u64 + 1)?;
            Ok(DurationGroup { tau: p.tau(), points: log_ratio_points(&f, &b, true)? })
        })
        .collect::<Result<Vec<_>, CliError>>()?;

    let per_tau = fit_durations(&groups, FitMode::PerTau)?;
    let pooled = fit_durations(&groups, FitMode::Pooled)?.remove(0);

    let mut per = CsvTable::new(&FIT_COLUMNS);
    let mut pool = CsvTable::new(&FIT_COLUMNS);
    for ((g, fit), &tau) in groups.iter().zip(&per_tau).zip(&cfg.tau_list_us) {
        push_fit_rows(&mut per, tau, g, fit);
        push_fit_rows(&mut pool, tau, g, &pooled);
    }
    let summary = vec![format!(
        "pooled fit: beta = {:.8} ± {:.2e} (h kHz)^-1, beta*dF = {:.8} ± {:.2e}, dF = {:.8} h kHz",
        pooled.beta_est, pooled.stderr_slope, pooled.beta_delta_f_est, pooled.stderr_intercept, pooled.delta_f_est
    )];
    Ok(Report {
        files: vec![
            ("crooks_per_tau.csv".into(), per.render()),
            ("crooks_pooled.csv".into(), pool.render()),
        ],
        summary,
        ..Default::default()
    })
}

pub fn run_charfn(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let beta = cfg.beta()?;
    let s = cfg.settings();
    let grid = cfg.u_grid();
    let per_tau = cfg
        .tau_list_us
        .par_iter()
        .enumerate()
        .map(|(k, &tau)| {
            let p = cfg.protocol(tau)?;
            let mut files = Vec::with_capacity(4);
            for (j, q) in [p.forward(), p.backward()].into_iter().enumerate() {
                let stream = 2 * k as u64 + j as u64;
                let series = simulate_ramsey(&q, beta, &grid, noise_for(cfg, stream).as_ref(), &s)?;
                let est = inverse_dft(&series)?;
                let tag = format!("{}_{}", q.direction().label(), tau_label(tau));
                files.push((format!("charfn_{tag}.csv"), series_table(&series).render()));
                files.push((format!("spectrum_{tag}.csv"), spectrum_table(&est).render()));
            }
            Ok(files)
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(Report { files: per_tau.into_iter().flatten().collect(), ..Default::default() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ExperimentConfig {
        ExperimentConfig { tau_list_us: vec![100.0, 320.0], ..Default::default() }
    }

    #[test]
    fn identity_rows_and_tolerance() {
        let r = run_identity(&small()).unwrap();
        assert!(r.failure.is_none());
        let body = &r.files[0].1;
        assert_eq!(body.lines().count(), 2 + 2 * 21);
    }

    #[test]
    fn identity_protocol_is_all_zero() {
        let cfg = ExperimentConfig {
            nu_tau_khz: 1.0,
            phase_sweep_deg: 0.0,
            tau_list_us: vec![200.0],
            ..Default::default()
        };
        let r = run_identity(&cfg).unwrap();
        for line in r.files[0].1.lines().skip(2) {
            let v: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
            for x in &v[2..] {
                assert!(x.abs() < 1e-12, "{line}");
            }
        }
    }

    #[test]
    fn fig4a_has_four_points_per_tau() {
        let r = run_figure4a(&small()).unwrap();
        assert_eq!(r.files[0].1.lines().count(), 2 + 8);
    }

    #[test]
    fn fig4c_includes_limits() {
        let r = run_figure4c(&small()).unwrap();
        let body = &r.files[0].1;
        let taus: Vec<f64> = body.lines().skip(2).map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
        assert_eq!(taus, vec![0.1, 100.0, 320.0, 50_000.0]);
    }

    #[test]
    fn monotonicity_detection() {
        assert!(monotonicity_breaks(&[(1.0, 3.0), (2.0, 2.0), (3.0, 1.0)]).is_empty());
        assert_eq!(monotonicity_breaks(&[(1.0, 3.0), (2.0, 2.0), (3.0, 2.5)]), vec![1]);
    }

    #[test]
    fn crooks_recovers_beta_noiseless() {
        let r = run_crooks(&small()).unwrap();
        assert_eq!(r.files.len(), 2);
        let row = r.files[1].1.lines().nth(2).unwrap().to_string();
        let slope: f64 = row.split(',').nth(3).unwrap().parse().unwrap();
        assert!((slope - 1.0 / 1.56).abs() < 1e-8);
    }

    #[test]
    fn charfn_files() {
        let cfg = ExperimentConfig { tau_list_us: vec![100.0], ..Default::default() };
        let r = run_charfn(&cfg).unwrap();
        let names: Vec<&str> = r.files.iter().map(|f| f.0.as_str()).collect();
        assert_eq!(
            names,
            ["charfn_F_tau100us.csv", "spectrum_F_tau100us.csv", "charfn_B_tau100us.csv", "spectrum_B_tau100us.csv"]
        );
        assert_eq!(r.files[0].1.lines().nth(1), Some("s,u_seconds,re_chi,im_chi"));
    }
}
