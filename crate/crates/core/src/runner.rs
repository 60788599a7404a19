//! Scenario runners: deterministic dataset emission behind the CLI.
//!
//! Every runner writes its data files plus a `manifest.json` carrying the
//! full configuration echo, derived quantities, tool version, timestamp and
//! per-file SHA-256 checksums. Identical configuration and seed produce
//! byte-identical data files; only the manifest timestamp varies.

use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use crate::ai_dynamics::{self, PuncturedKind};
use crate::error::{Error, Result};
use crate::exact_dynamics::{self, EnvelopeMethod};
use crate::io;
use crate::kibble_zurek::{classify_regime, relaxation_time, RegimeLabel};
use crate::microcrystal::{self, ChainParams};
use crate::scenario::{RunManifest, ScenarioConfig};
use crate::tomography::{self, Apodization};

/// Envelope dual-route agreement demanded at the manifest checkpoints.
pub const METHOD_AGREEMENT_TOL: f64 = 1e-8;

/// One row of the dynamics dataset (times in units of t̂).
#[derive(Debug, Clone, Copy)]
pub struct DynamicsSample {
    pub t_over_that: f64,
    pub inv_dq2_ai: f64,
    pub inv_dpi2_ai: f64,
    pub product_ai: f64,
    pub inv_dq2_exact: f64,
    pub inv_dpi2_exact: f64,
    pub product_exact: f64,
    pub theta_wrapped: f64,
}

/// Exact and adiabatic-impulse observables on a sample grid, plus the
/// unwrapped angle series.
pub fn dynamics_series(
    config: &ScenarioConfig,
    times_over_that: &[f64],
) -> Result<(Vec<DynamicsSample>, Vec<f64>)> {
    let sc = config.scenario()?;
    let t_hat = sc.t_hat;
    let omega0 = sc.ramp.omega0();
    let times_abs: Vec<f64> = times_over_that.iter().map(|&x| x * t_hat).collect();
    let envelopes = exact_dynamics::envelope_series(&sc, &times_abs)?;

    let mut rows = Vec::with_capacity(times_abs.len());
    for (x, env) in times_over_that.iter().zip(&envelopes) {
        let t_abs = x * t_hat;
        // frozen-state values stand in for the closed forms before t_hat
        let (ai_q, ai_p) = if t_abs >= t_hat * (1.0 - 1e-12) {
            (ai_dynamics::inv_dq2(&sc, t_abs)?, ai_dynamics::inv_dpi2(&sc, t_abs)?)
        } else {
            (2.0 * sc.big_n * omega0, 2.0 / (sc.big_n * omega0))
        };
        let g = env.f.norm_sqr();
        let h = env.f_dot.norm_sqr();
        let inv_dq2 = 2.0 * sc.big_n * omega0 / g;
        let inv_dpi2 = 2.0 * omega0 / (sc.big_n * h);
        let im_omega = -sc.big_n * (env.f.conj() * env.f_dot).re / g;
        rows.push(DynamicsSample {
            t_over_that: *x,
            inv_dq2_ai: ai_q,
            inv_dpi2_ai: ai_p,
            product_ai: 1.0 / (ai_q * ai_p),
            inv_dq2_exact: inv_dq2,
            inv_dpi2_exact: inv_dpi2,
            product_exact: 1.0 / (inv_dq2 * inv_dpi2),
            theta_wrapped: im_omega.atan(),
        });
    }
    let unwrapped =
        exact_dynamics::unwrap_angles(&rows.iter().map(|r| r.theta_wrapped).collect::<Vec<_>>());
    Ok((rows, unwrapped))
}

fn prepare_out_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    Ok(())
}

fn manifest_skeleton(config: &ScenarioConfig, absolute_times: bool) -> Result<RunManifest> {
    let ramp = config.ramp()?;
    let t_hat = ramp.freeze_out_time();
    let start_abs = (config.time_grid.t_start * t_hat).max(ramp.t0());
    Ok(RunManifest {
        config: config.clone(),
        t_hat,
        omega0: ramp.omega0(),
        regime_at_start: classify_regime(&ramp, start_abs)?,
        absolute_times,
        envelope_method_max_discrepancy: None,
        version: env!("CARGO_PKG_VERSION").to_string(),
        unix_timestamp: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        checksums: Default::default(),
    })
}

fn finish_manifest(mut manifest: RunManifest, dir: &Path, files: &[String]) -> Result<RunManifest> {
    manifest.checksums = io::checksum_files(dir, files)?;
    let mut w = std::io::BufWriter::new(fs::File::create(dir.join("manifest.json"))?);
    serde_json::to_writer_pretty(&mut w, &manifest).map_err(std::io::Error::other)?;
    use std::io::Write;
    w.flush()?;
    Ok(manifest)
}

/// Cross-check the two envelope routes at a few checkpoints; errors beyond
/// the agreement tolerance surface as `Error::Tolerance` (CLI exit code 3).
fn envelope_health_check(config: &ScenarioConfig, times_over_that: &[f64]) -> Result<f64> {
    let sc = config.scenario()?;
    let n = times_over_that.len();
    if n == 0 {
        return Ok(0.0);
    }
    let picks: Vec<f64> = if n == 1 {
        vec![times_over_that[0]]
    } else {
        (0..5).map(|i| times_over_that[i * (n - 1) / 4]).collect()
    };
    let mut worst = 0.0f64;
    for x in picks {
        let t_abs = x * sc.t_hat;
        if sc.ramp.delta().cbrt() * t_abs > 1e4 {
            continue; // Airy route out of range; single-route regime
        }
        let d = exact_dynamics::method_discrepancy(&sc, t_abs)?;
        worst = worst.max(d);
    }
    if worst > METHOD_AGREEMENT_TOL {
        return Err(Error::Tolerance(format!(
            "envelope methods disagree by {worst:.3e} (tolerance {METHOD_AGREEMENT_TOL:.0e})"
        )));
    }
    Ok(worst)
}

/// Emit the dynamics dataset: `dynamics.csv` + `punctured_times.csv`.
pub fn run_dynamics(config: &ScenarioConfig, out_dir: &Path, absolute_times: bool) -> Result<RunManifest> {
    config.validate()?;
    prepare_out_dir(out_dir)?;
    let times = config.times_over_that();
    let (rows, unwrapped) = dynamics_series(config, &times)?;
    let mut manifest = manifest_skeleton(config, absolute_times)?;
    manifest.envelope_method_max_discrepancy = Some(envelope_health_check(config, &times)?);
    let t_hat = manifest.t_hat;
    let time_scale = if absolute_times { t_hat } else { 1.0 };

    let time_col = if absolute_times { "t" } else { "t_over_that" };
    let header = format!(
        "{time_col},inv_dq2_ai,inv_dpi2_ai,product_ai,inv_dq2_exact,inv_dpi2_exact,product_exact,theta_wrapped,theta_unwrapped"
    );
    io::write_csv(
        &out_dir.join("dynamics.csv"),
        &header,
        rows.iter().zip(&unwrapped).map(|(r, &un)| {
            vec![
                r.t_over_that * time_scale,
                r.inv_dq2_ai,
                r.inv_dpi2_ai,
                r.product_ai,
                r.inv_dq2_exact,
                r.inv_dpi2_exact,
                r.product_exact,
                r.theta_wrapped,
                un,
            ]
        }),
    )?;

    // companion comb file
    let kappa_max = 8;
    let loc = ai_dynamics::punctured_times(PuncturedKind::Localization, kappa_max, 1.0);
    let rev = ai_dynamics::punctured_times(PuncturedKind::Revival, kappa_max, 1.0);
    let mut w = std::io::BufWriter::new(fs::File::create(out_dir.join("punctured_times.csv"))?);
    use std::io::Write;
    writeln!(w, "kind,kappa,{time_col}")?;
    for (k, &t) in loc.iter().enumerate() {
        writeln!(w, "localization,{k},{}", io::fmt_float(t * time_scale))?;
    }
    for (k, &t) in rev.iter().enumerate() {
        writeln!(w, "revival,{k},{}", io::fmt_float(t * time_scale))?;
    }
    w.flush()?;
    drop(w);

    finish_manifest(
        manifest,
        out_dir,
        &["dynamics.csv".to_string(), "punctured_times.csv".to_string()],
    )
}

/// Emit one Wigner grid file (+ JSON sidecar) per requested time.
pub fn run_wigner(
    config: &ScenarioConfig,
    times_over_that: &[f64],
    out_dir: &Path,
    absolute_times: bool,
) -> Result<RunManifest> {
    config.validate()?;
    prepare_out_dir(out_dir)?;
    let sc = config.scenario()?;
    let mut files = Vec::new();
    for (i, &x) in times_over_that.iter().enumerate() {
        let t_abs = x * sc.t_hat;
        let mut grid = exact_dynamics::wigner(&sc, t_abs, &config.grid)?;
        if !absolute_times {
            grid.t = x;
        }
        let csv = format!("wigner_{i:03}.csv");
        let json = format!("wigner_{i:03}.json");
        io::write_wigner_csv(&grid, &out_dir.join(&csv))?;
        io::write_wigner_sidecar(&grid, &out_dir.join(&json))?;
        files.push(csv);
        files.push(json);
    }
    let manifest = manifest_skeleton(config, absolute_times)?;
    finish_manifest(manifest, out_dir, &files)
}

/// Emit marginals, optional samples, the reconstruction and its report.
pub fn run_tomography(
    config: &ScenarioConfig,
    time_over_that: f64,
    out_dir: &Path,
    absolute_times: bool,
) -> Result<RunManifest> {
    config.validate()?;
    prepare_out_dir(out_dir)?;
    let sc = config.scenario()?;
    let t_abs = time_over_that * sc.t_hat;
    let grid = exact_dynamics::wigner(&sc, t_abs, &config.grid)?;
    let quads = tomography::quadrature_set(&grid, config.tomography.angles)?;
    io::write_quadratures_csv(&quads, &out_dir.join("marginals.csv"))?;
    let mut files = vec!["marginals.csv".to_string()];

    if config.tomography.samples_per_angle > 0 {
        let samples: Vec<Vec<f64>> = quads
            .angles
            .iter()
            .enumerate()
            .map(|(i, _)| {
                tomography::sample_quadrature(
                    &quads.x_axis,
                    &quads.distributions[i],
                    config.tomography.samples_per_angle,
                    config.tomography.seed,
                    i as u64,
                )
                .map(|s| s.values)
            })
            .collect::<Result<_>>()?;
        io::write_samples_csv(&quads.angles, &samples, &out_dir.join("samples.csv"))?;
        files.push("samples.csv".to_string());
    }

    let report = tomography::reconstruct(&quads, grid.q_axis.len(), Apodization::None, Some(&grid))?;
    io::write_wigner_csv(&report.grid, &out_dir.join("reconstruction.csv"))?;
    io::write_wigner_sidecar(&report.grid, &out_dir.join("reconstruction.json"))?;
    files.push("reconstruction.csv".to_string());
    files.push("reconstruction.json".to_string());

    let report_json = serde_json::json!({
        "time_over_that": time_over_that,
        "l2_error": report.l2_error,
        "sup_error": report.sup_error,
        "angles_used": report.angles_used,
        "filter": report.filter,
        "sparse_angles": report.sparse_angles,
    });
    fs::write(
        out_dir.join("report.json"),
        serde_json::to_string_pretty(&report_json).map_err(std::io::Error::other)?,
    )?;
    files.push("report.json".to_string());

    let manifest = manifest_skeleton(config, absolute_times)?;
    finish_manifest(manifest, out_dir, &files)
}

/// Regime map over the (t/t̂, t0/t̂) plane plus the τ(t) curve.
pub fn run_regime_map(
    config: &ScenarioConfig,
    t_range: (f64, f64),
    t0_range: (f64, f64),
    resolution: usize,
    out_dir: &Path,
) -> Result<RunManifest> {
    config.validate()?;
    if resolution < 2 || !(t_range.0 > 0.0) || !(t0_range.0 > 0.0) || t_range.1 <= t_range.0
        || t0_range.1 <= t0_range.0
    {
        return Err(Error::InvalidParameter("regime map needs positive, ordered ranges".into()));
    }
    prepare_out_dir(out_dir)?;
    let delta = config.model.delta;
    let t_hat = crate::kibble_zurek::freeze_out_time(delta)?;
    let ts = exact_dynamics::linspace(t_range.0, t_range.1, resolution);
    let t0s = exact_dynamics::linspace(t0_range.0, t0_range.1, resolution);

    let mut w = std::io::BufWriter::new(fs::File::create(out_dir.join("regimes.csv"))?);
    use std::io::Write;
    writeln!(w, "t_over_that,t0_over_that,regime")?;
    for &x0 in &t0s {
        let ramp = crate::kibble_zurek::RampSpec::from_initial_time(delta, x0 * t_hat)?;
        for &x in &ts {
            if x < x0 {
                continue; // t precedes the ramp start
            }
            let label = classify_regime(&ramp, x * t_hat)?;
            writeln!(w, "{},{},{label}", io::fmt_float(x), io::fmt_float(x0))?;
        }
    }
    w.flush()?;
    drop(w);

    io::write_csv(
        &out_dir.join("tau_curve.csv"),
        "t_over_that,tau_over_that",
        ts.iter().map(|&x| {
            let tau = relaxation_time(delta, x * t_hat).expect("positive inputs");
            vec![x, tau / t_hat]
        }),
    )?;

    let manifest = manifest_skeleton(config, false)?;
    finish_manifest(manifest, out_dir, &["regimes.csv".to_string(), "tau_curve.csv".to_string()])
}

/// Phonon dispersion table with the dense-diagonalization cross-check.
pub fn run_dispersion(config: &ScenarioConfig, out_dir: &Path) -> Result<RunManifest> {
    config.validate()?;
    prepare_out_dir(out_dir)?;
    let n_atoms = config.model.n;
    if n_atoms.fract() != 0.0 || n_atoms < 2.0 || n_atoms > 4096.0 {
        return Err(Error::InvalidParameter(format!(
            "dispersion needs an integer atom count in [2, 4096]; got model.n = {n_atoms}"
        )));
    }
    let params = ChainParams::new(
        n_atoms as usize,
        config.model.kappa,
        config.model.mass,
        config.model.lattice_const,
    )?;
    let modes = microcrystal::phonon_dispersion(&params);
    let diag = microcrystal::dynamical_matrix_frequencies(&params);

    // pair by energy rank, then report rows in k order
    let mut order: Vec<usize> = (0..modes.len()).collect();
    order.sort_by(|&a, &b| modes[a].energy.partial_cmp(&modes[b].energy).unwrap());
    let mut paired = vec![0.0; modes.len()];
    for (rank, &idx) in order.iter().enumerate() {
        paired[idx] = diag[rank];
    }

    let mut w = std::io::BufWriter::new(fs::File::create(out_dir.join("dispersion.csv"))?);
    use std::io::Write;
    writeln!(w, "k,a_k,b_k,eps_bogoliubov,eps_diagonalization,abs_diff,zero_mode")?;
    for (mode, &eps_diag) in modes.iter().zip(&paired) {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            io::fmt_float(mode.k),
            io::fmt_float(mode.a_k),
            io::fmt_float(mode.b_k),
            io::fmt_float(mode.energy),
            io::fmt_float(eps_diag),
            io::fmt_float((mode.energy - eps_diag).abs()),
            mode.energy == 0.0
        )?;
    }
    w.flush()?;
    drop(w);

    let manifest = manifest_skeleton(config, false)?;
    finish_manifest(manifest, out_dir, &["dispersion.csv".to_string()])
}

/// Run a closure inside a worker pool of the requested size (no-op without
/// the `parallel` feature).
pub fn with_workers<T: Send>(workers: Option<usize>, job: impl FnOnce() -> T + Send) -> T {
    #[cfg(feature = "parallel")]
    {
        if let Some(n) = workers {
            if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(n).build() {
                return pool.install(job);
            }
        }
        job()
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = workers;
        job()
    }
}

/// Classification of a regime-map row, re-exported for dataset consumers.
pub fn regime_label_text(label: RegimeLabel) -> String {
    label.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    #[test]
    fn dynamics_run_is_deterministic() {
        let mut config = ScenarioConfig::default();
        config.time_grid.n_samples = 64; // keep the unit test quick
        let dir_a = tempdir().unwrap();
        let dir_b = tempdir().unwrap();
        let ma = run_dynamics(&config, dir_a.path(), false).unwrap();
        let mb = run_dynamics(&config, dir_b.path(), false).unwrap();
        for name in ["dynamics.csv", "punctured_times.csv"] {
            let a = fs::read(dir_a.path().join(name)).unwrap();
            let b = fs::read(dir_b.path().join(name)).unwrap();
            assert_eq!(a, b, "{name} differs between identical runs");
        }
        assert_eq!(ma.checksums, mb.checksums);
        assert!(ma.envelope_method_max_discrepancy.unwrap() <= METHOD_AGREEMENT_TOL);
        assert_eq!(ma.regime_at_start, RegimeLabel::Impulse);
    }

    #[test]
    fn single_row_grid_is_fine() {
        let mut config = ScenarioConfig::default();
        config.time_grid.n_samples = 1;
        let dir = tempdir().unwrap();
        run_dynamics(&config, dir.path(), false).unwrap();
        let text = fs::read_to_string(dir.path().join("dynamics.csv")).unwrap();
        assert_eq!(text.lines().count(), 2, "header plus exactly one row");
    }

    #[test]
    fn wigner_run_empty_times_writes_manifest_only() {
        let config = ScenarioConfig::default();
        let dir = tempdir().unwrap();
        let manifest = run_wigner(&config, &[], dir.path(), false).unwrap();
        assert!(manifest.checksums.is_empty());
        assert!(dir.path().join("manifest.json").exists());
    }

    #[test]
    fn dispersion_run_schema() {
        let mut config = ScenarioConfig::default();
        config.model.n = 8.0;
        let dir = tempdir().unwrap();
        run_dispersion(&config, dir.path()).unwrap();
        let text = fs::read_to_string(dir.path().join("dispersion.csv")).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 9, "header + 8 rows");
        assert_eq!(lines.iter().filter(|l| l.ends_with(",true")).count(), 1);
        // every nonzero mode agrees with the diagonalization oracle
        for line in &lines[1..] {
            let cols: Vec<&str> = line.split(',').collect();
            let eps: f64 = cols[3].parse().unwrap();
            let diff: f64 = cols[5].parse().unwrap();
            if eps > 0.0 {
                assert!(diff <= 1e-10 * eps.max(1.0), "abs_diff = {diff}");
            }
        }
        // non-integer N is rejected
        config.model.n = 8.5;
        assert!(run_dispersion(&config, dir.path()).is_err());
    }

    #[test]
    fn regime_map_covers_the_plane() {
        let config = ScenarioConfig::default();
        let dir = tempdir().unwrap();
        run_regime_map(&config, (0.1, 2.0), (0.1, 2.0), 8, dir.path()).unwrap();
        let text = fs::read_to_string(dir.path().join("regimes.csv")).unwrap();
        assert!(text.contains("impulse") && text.contains("adiabatic"));
        let tau = fs::read_to_string(dir.path().join("tau_curve.csv")).unwrap();
        // tau(t)/t_hat = (t/t_hat)^(-1/2): at t/t_hat = 0.1 the curve reads sqrt(10)
        let first = tau.lines().nth(1).unwrap();
        let cols: Vec<f64> = first.split(',').map(|c| c.parse().unwrap()).collect();
        assert!((cols[1] - 10f64.sqrt()).abs() < 1e-9);
    }
}
