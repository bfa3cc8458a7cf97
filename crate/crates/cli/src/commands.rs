//! One function per subcommand. Each writes its artifacts, the run manifest
//! next to them, and its summary lines to `stdout`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use aircont_core::csvfmt::sig9;
use aircont_core::montecarlo::{run_sweep, write_sweep_csv};
use aircont_core::scaling::{
    effective_gain_air, effective_gain_sota, mse_air, mse_sota, optimize_air_scaling,
    optimize_sota_scaling,
};
use aircont_core::simulate::{
    simulate_closed_loop, tracking_error, write_trajectories_csv, SimScheme,
};
use aircont_core::stability::{
    area_ratio, region_area, sweep_stability, write_stability_csv, Region,
};
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::validate::{run_checks, Faults};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Stability,
    MseSweep,
    Simulate,
    Validate,
    ScalingDebug,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Stability => "stability",
            Command::MseSweep => "mse-sweep",
            Command::Simulate => "simulate",
            Command::Validate => "validate",
            Command::ScalingDebug => "scaling-debug",
        }
    }

    /// Output file used when `--out` is not given; `None` means stdout only.
    pub fn default_output(self) -> Option<&'static str> {
        match self {
            Command::Stability => Some("stability.csv"),
            Command::MseSweep => Some("mse_sweep.csv"),
            Command::Simulate => Some("trajectories.csv"),
            Command::Validate | Command::ScalingDebug => None,
        }
    }
}

/// Where the manifest of an output goes: `<out>.manifest.toml`.
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.toml");
    PathBuf::from(s)
}

#[derive(Serialize)]
struct ManifestInfo<'a> {
    command: &'a str,
    version: &'a str,
    seed: u64,
    outputs: Vec<String>,
}

#[derive(Serialize)]
struct ManifestTable<'a> {
    manifest: ManifestInfo<'a>,
}

/// Resolved config followed by a `[manifest]` table; loadable as a config.
pub fn render_manifest(cfg: &RunConfig, command: Command, outputs: &[&Path]) -> String {
    let info = ManifestTable {
        manifest: ManifestInfo {
            command: command.name(),
            version: env!("CARGO_PKG_VERSION"),
            seed: cfg.seed,
            outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
        },
    };
    format!(
        "{}\n{}",
        cfg.to_toml(),
        toml::to_string(&info).expect("manifest serializes")
    )
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::io(path.display().to_string(), e))
}

fn write_file<F>(path: &Path, body: F) -> Result<(), CliError>
where
    F: FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
{
    let mut w = create(path)?;
    body(&mut w)
        .and_then(|_| w.flush())
        .map_err(|e| CliError::io(path.display().to_string(), e))
}

fn write_manifest(cfg: &RunConfig, command: Command, out: &Path) -> Result<(), CliError> {
    let text = render_manifest(cfg, command, &[out]);
    let path = manifest_path(out);
    write_file(&path, |w| w.write_all(text.as_bytes()))
}

fn emit(stdout: &mut dyn Write, line: String) -> Result<(), CliError> {
    writeln!(stdout, "{line}").map_err(|e| CliError::io("stdout", e))
}

pub fn cmd_stability(cfg: &RunConfig, out: &Path, stdout: &mut dyn Write) -> Result<(), CliError> {
    let cells = sweep_stability(&cfg.grid_spec())?;
    write_file(out, |w| write_stability_csv(w, &cells))?;
    write_manifest(cfg, Command::Stability, out)?;
    for (label, region) in [
        ("max_stable_cells", Region::MaxStable),
        ("air_cells", Region::AchievableAir),
        ("sota_cells", Region::AchievableSota),
    ] {
        emit(
            stdout,
            format!("{label}={}", region_area(&cells, region)?.cell_count),
        )?;
    }
    let ratio = match area_ratio(&cells)? {
        Some(r) => sig9(r),
        None => "undefined".into(),
    };
    emit(stdout, format!("area_ratio={ratio}"))
}

pub fn cmd_mse_sweep(cfg: &RunConfig, out: &Path, stdout: &mut dyn Write) -> Result<(), CliError> {
    let rows = run_sweep(&cfg.sweep)?;
    write_file(out, |w| write_sweep_csv(w, &rows))?;
    write_manifest(cfg, Command::MseSweep, out)?;
    let skipped: usize = rows.iter().map(|r| r.skipped).sum();
    emit(stdout, format!("rows={}", rows.len()))?;
    if skipped > 0 {
        emit(stdout, format!("skipped_degenerate_trials={skipped}"))?;
    }
    Ok(())
}

pub fn cmd_simulate(cfg: &RunConfig, out: &Path, stdout: &mut dyn Write) -> Result<(), CliError> {
    let run = |s| -> Result<_, CliError> { Ok(simulate_closed_loop(&cfg.sim_config(s)?)?) };
    let ideal = run(SimScheme::Ideal)?;
    let air = run(SimScheme::Air)?;
    let sota = run(SimScheme::Sota)?;
    let rmse_air = tracking_error(&air, &ideal.at_times_of(&air)?)?;
    let rmse_sota = tracking_error(&sota, &ideal.at_times_of(&sota)?)?;
    write_file(out, |w| write_trajectories_csv(w, &[ideal, air, sota]))?;
    write_manifest(cfg, Command::Simulate, out)?;
    emit(stdout, format!("rmse_air={}", sig9(rmse_air)))?;
    emit(stdout, format!("rmse_sota={}", sig9(rmse_sota)))?;
    emit(
        stdout,
        format!("rmse_air<rmse_sota={}", rmse_air < rmse_sota),
    )
}

pub fn cmd_scaling_debug(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<Vec<String>, CliError> {
    let ch = cfg.channel()?;
    let k = &cfg.sim.gain;
    let list = |v: &[f64]| v.iter().map(|x| sig9(*x)).collect::<Vec<_>>().join(",");
    let air = optimize_air_scaling(&ch, k)?;
    let sota = optimize_sota_scaling(&ch, k)?;
    let lines = vec![
        format!("air.alpha={}", sig9(air.alpha)),
        format!("air.beta=[{}]", list(&air.beta)),
        format!(
            "air.effective_gain=[{}]",
            list(&effective_gain_air(&air, &ch)?)
        ),
        format!("air.mse={}", sig9(mse_air(&air, &ch, k)?)),
        format!("sota.beta=[{}]", list(&sota.beta)),
        format!("sota.alpha_s=[{}]", list(&sota.alpha_s)),
        format!("sota.alpha_a={}", sig9(sota.alpha_a)),
        format!(
            "sota.effective_gain=[{}]",
            list(&effective_gain_sota(&sota, &ch)?)
        ),
        format!("sota.mse={}", sig9(mse_sota(&sota, &ch, k)?)),
    ];
    for l in &lines {
        emit(stdout, l.clone())?;
    }
    Ok(lines)
}

/// Runs the oracle checks and prints one line per check. Returns the lines
/// and the number of failed checks.
pub fn cmd_validate(
    seed: u64,
    faults: &Faults,
    stdout: &mut dyn Write,
) -> Result<(Vec<String>, usize), CliError> {
    let results = run_checks(seed, faults);
    let lines: Vec<String> = results.iter().map(|r| r.line()).collect();
    for l in &lines {
        emit(stdout, l.clone())?;
    }
    Ok((lines, results.iter().filter(|r| !r.passed).count()))
}

/// Dispatches `command`. Report-only commands write their report to `out`
/// (plus a manifest) when one is given; a failed validation still leaves
/// its report behind before returning `CheckFailed`.
pub fn run(
    command: Command,
    cfg: &RunConfig,
    out: Option<&Path>,
    faults: &Faults,
    stdout: &mut dyn Write,
) -> Result<(), CliError> {
    let out = out
        .map(Path::to_path_buf)
        .or_else(|| command.default_output().map(PathBuf::from));
    let (lines, failed) = match (command, out.as_deref()) {
        (Command::Stability, Some(o)) => return cmd_stability(cfg, o, stdout),
        (Command::MseSweep, Some(o)) => return cmd_mse_sweep(cfg, o, stdout),
        (Command::Simulate, Some(o)) => return cmd_simulate(cfg, o, stdout),
        (Command::ScalingDebug, _) => (cmd_scaling_debug(cfg, stdout)?, 0),
        (Command::Validate, _) => cmd_validate(cfg.seed, faults, stdout)?,
        (_, None) => unreachable!("file-producing commands have a default output"),
    };
    if let Some(o) = out.as_deref() {
        write_file(o, |w| lines.iter().try_for_each(|l| writeln!(w, "{l}")))?;
        write_manifest(cfg, command, o)?;
    }
    if failed > 0 {
        return Err(CliError::CheckFailed(format!(
            "{failed} of {} checks failed",
            lines.len()
        )));
    }
    Ok(())
}
