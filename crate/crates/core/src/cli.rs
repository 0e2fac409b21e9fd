//! Command-line front end. Each invocation writes one CSV file headed by
//! `# key = value` metadata lines.
//!
//! Exit codes: 0 success, 2 usage or config-file error, 3 parameter outside
//! its domain, 4 non-unit direction, 5 vanishing drive or effective field,
//! 6 no dissipation, 7 dark detector, 8 frequency grid too narrow,
//! 9 output failure or failed validation.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;

use crate::bloch::{evolve_trajectory, stationary_purity, BlochVector};
use crate::error::KondoError;
use crate::model::{build_driven_config, jones_from_amplitudes, DrivenConfig, JonesPolarization, KondoParams, Vec3};
use crate::spectra::{ellipticity, spectrum_resolved, spectrum_unresolved, uniform_grid};
use crate::statistics::g2_curve;
use crate::validate::run_all;

pub const OUT_DIR_ENV: &str = "PHOTONIC_KONDO_OUT";

#[derive(Debug, Parser)]
#[command(name = "photonic-kondo", version, about = "Spin dynamics, spectra and photon statistics of the photonic Kondo model")]
struct Cli {
    /// key = value file supplying defaults for any flag
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output CSV path, `-` for stdout; relative paths land in $PHOTONIC_KONDO_OUT when set
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Times in the units of the inputs instead of 1/Γ
    #[arg(long, global = true)]
    raw_units: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Bloch vector and purity against time
    Dynamics {
        #[command(flatten)]
        model: ModelArgs,
        /// Initial Bloch vector (default: the origin)
        #[arg(long, allow_hyphen_values = true, value_parser = parse_vec3)]
        s0: Option<Vec3>,
        #[command(flatten)]
        time: TimeArgs,
    },
    /// Unresolved inelastic spectrum
    Spectrum {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        grid: NuArgs,
    },
    /// Polarization-resolved spectrum for detector direction n_d
    SpectrumResolved {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, allow_hyphen_values = true, value_parser = parse_vec3)]
        nd: Option<Vec3>,
        #[command(flatten)]
        grid: NuArgs,
    },
    /// Ellipticity of the outgoing field against Δ/Ω₀
    Ellipticity {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, allow_hyphen_values = true)]
        ratio_min: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        ratio_max: Option<f64>,
        #[arg(long)]
        ratio_steps: Option<usize>,
    },
    /// Second-order coherence g²_{n,m}(τ); m is the first detected photon
    G2 {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, allow_hyphen_values = true, value_parser = parse_vec3)]
        n: Option<Vec3>,
        #[arg(long, allow_hyphen_values = true, value_parser = parse_vec3)]
        m: Option<Vec3>,
        #[command(flatten)]
        time: TimeArgs,
    },
    /// Run the oracle suite
    Validate {
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Debug, Args)]
struct ModelArgs {
    #[arg(long = "J", allow_hyphen_values = true)]
    j: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    f: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    omega0: Option<f64>,
    /// Drive direction n_cl (with --f)
    #[arg(long, allow_hyphen_values = true, value_parser = parse_vec3)]
    ncl: Option<Vec3>,
    /// Amplitude α₊ as re,im (with --alpha-minus and --length)
    #[arg(long, allow_hyphen_values = true, value_parser = parse_complex)]
    alpha_plus: Option<Complex64>,
    #[arg(long, allow_hyphen_values = true, value_parser = parse_complex)]
    alpha_minus: Option<Complex64>,
    #[arg(long, allow_hyphen_values = true)]
    length: Option<f64>,
}

#[derive(Debug, Args)]
struct TimeArgs {
    #[arg(long, allow_hyphen_values = true)]
    tau_max: Option<f64>,
    #[arg(long)]
    tau_steps: Option<usize>,
}

#[derive(Debug, Args)]
struct NuArgs {
    #[arg(long, allow_hyphen_values = true)]
    nu_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    nu_max: Option<f64>,
    #[arg(long)]
    nu_steps: Option<usize>,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Model(KondoError),
    Output(String),
    ValidationFailed(usize),
}

impl From<KondoError> for CliError {
    fn from(e: KondoError) -> Self {
        CliError::Model(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Model(e) => match e {
                KondoError::NonPositiveOmega3(_)
                | KondoError::NegativeCoupling(_)
                | KondoError::Anisotropic { .. }
                | KondoError::StepTooLarge { .. }
                | KondoError::InvalidInput(_) => 3,
                KondoError::NonUnitVector { .. } => 4,
                KondoError::ZeroField | KondoError::ZeroEffectiveField => 5,
                KondoError::NoDissipation => 6,
                KondoError::DetectorDark { .. } => 7,
                KondoError::GridTooNarrow { .. } => 8,
            },
            CliError::Output(_) | CliError::ValidationFailed(_) => 9,
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Usage(m) | CliError::Output(m) => m.clone(),
            CliError::Model(e) => e.to_string(),
            CliError::ValidationFailed(n) => format!("{n} validation check(s) failed"),
        }
    }
}

fn parse_numbers(s: &str, count: usize) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != count {
        return Err(format!("expected {count} comma-separated numbers, got `{s}`"));
    }
    parts.iter().map(|p| p.parse::<f64>().map_err(|e| format!("`{p}`: {e}"))).collect()
}

fn parse_vec3(s: &str) -> Result<Vec3, String> {
    let v = parse_numbers(s, 3)?;
    Ok(Vec3::new(v[0], v[1], v[2]))
}

fn parse_complex(s: &str) -> Result<Complex64, String> {
    let v = parse_numbers(s, 2)?;
    Ok(Complex64::new(v[0], v[1]))
}

/// `key = value` lines; `#` starts a comment.
fn read_config_file(path: &PathBuf) -> Result<BTreeMap<String, String>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("{}:{}: expected `key = value`", path.display(), lineno + 1)))?;
        map.insert(key.trim().replace('_', "-"), value.trim().to_string());
    }
    Ok(map)
}

struct FileValues {
    map: BTreeMap<String, String>,
}

impl FileValues {
    fn fill<T>(&mut self, slot: &mut Option<T>, key: &str, parse: fn(&str) -> Result<T, String>) -> Result<(), CliError> {
        if let Some(raw) = self.map.remove(key) {
            if slot.is_none() {
                *slot = Some(parse(&raw).map_err(|e| CliError::Usage(format!("config key `{key}`: {e}")))?);
            }
        }
        Ok(())
    }

    fn finish(self) -> Result<(), CliError> {
        match self.map.keys().next() {
            Some(k) => Err(CliError::Usage(format!("config key `{k}` does not apply to this command"))),
            None => Ok(()),
        }
    }
}

fn parse_f64(s: &str) -> Result<f64, String> {
    s.parse().map_err(|e| format!("{e}"))
}

fn parse_usize(s: &str) -> Result<usize, String> {
    s.parse().map_err(|e| format!("{e}"))
}

fn parse_u64(s: &str) -> Result<u64, String> {
    s.parse().map_err(|e| format!("{e}"))
}

impl ModelArgs {
    fn merge(&mut self, file: &mut FileValues) -> Result<(), CliError> {
        file.fill(&mut self.j, "J", parse_f64)?;
        file.fill(&mut self.f, "f", parse_f64)?;
        file.fill(&mut self.delta, "delta", parse_f64)?;
        file.fill(&mut self.omega0, "omega0", parse_f64)?;
        file.fill(&mut self.ncl, "ncl", parse_vec3)?;
        file.fill(&mut self.alpha_plus, "alpha-plus", parse_complex)?;
        file.fill(&mut self.alpha_minus, "alpha-minus", parse_complex)?;
        file.fill(&mut self.length, "length", parse_f64)
    }
}

impl TimeArgs {
    fn merge(&mut self, file: &mut FileValues) -> Result<(), CliError> {
        file.fill(&mut self.tau_max, "tau-max", parse_f64)?;
        file.fill(&mut self.tau_steps, "tau-steps", parse_usize)
    }
}

impl NuArgs {
    fn merge(&mut self, file: &mut FileValues) -> Result<(), CliError> {
        file.fill(&mut self.nu_min, "nu-min", parse_f64)?;
        file.fill(&mut self.nu_max, "nu-max", parse_f64)?;
        file.fill(&mut self.nu_steps, "nu-steps", parse_usize)
    }

    fn grid(&self) -> Result<Vec<f64>, CliError> {
        let lo = self.nu_min.unwrap_or(crate::spectra::DEFAULT_NU_MIN);
        let hi = self.nu_max.unwrap_or(crate::spectra::DEFAULT_NU_MAX);
        let n = self.nu_steps.unwrap_or(crate::spectra::DEFAULT_NU_STEPS);
        if !(hi > lo) || n < 2 {
            return Err(KondoError::InvalidInput(format!("frequency grid [{lo}, {hi}] with {n} points")).into());
        }
        Ok(uniform_grid(lo, hi, n))
    }
}

/// Metadata lines, kept in insertion order.
struct Meta(Vec<(String, String)>);

impl Meta {
    fn put(&mut self, key: &str, value: impl ToString) {
        self.0.push((key.to_string(), value.to_string()));
    }
}

fn fmt_vec(v: &Vec3) -> String {
    format!("{},{},{}", v.x, v.y, v.z)
}

fn fmt_complex(z: &Complex64) -> String {
    format!("{},{}", z.re, z.im)
}

fn build_config(model: &ModelArgs, meta: &mut Meta) -> Result<DrivenConfig, CliError> {
    let j = model.j.ok_or_else(|| CliError::Usage("missing --J".into()))?;
    let delta = model.delta.unwrap_or(0.0);
    let omega0 = model.omega0.unwrap_or(100.0);
    let amplitudes = (model.alpha_plus, model.alpha_minus, model.length);
    let (f, n_cl) = match (model.ncl, amplitudes) {
        (Some(n), (None, None, None)) => (model.f.ok_or_else(|| CliError::Usage("missing --f".into()))?, n),
        (None, (Some(ap), Some(am), Some(length))) => {
            if model.f.is_some() {
                return Err(CliError::Usage("--f is derived from the amplitudes; do not pass both".into()));
            }
            let pol = JonesPolarization::new(ap, am, length)?;
            let drive = jones_from_amplitudes(&pol)?;
            meta.put("alpha_plus", fmt_complex(&ap));
            meta.put("alpha_minus", fmt_complex(&am));
            meta.put("length", length);
            (drive.f, drive.n_cl.normalize())
        }
        _ => {
            return Err(CliError::Usage(
                "give the drive either as --ncl with --f or as --alpha-plus, --alpha-minus and --length".into(),
            ))
        }
    };
    let config = build_driven_config(KondoParams::new(j, f, delta, omega0)?, n_cl)?;
    meta.put("J", j);
    meta.put("f", f);
    meta.put("delta", delta);
    meta.put("omega0", omega0);
    meta.put("ncl", fmt_vec(&n_cl));
    meta.put("phi", config.phase().phi());
    meta.put("Omega0", config.lamb_shift());
    meta.put("Gamma", config.gamma());
    meta.put("Omega", config.omega());
    meta.put("h_eff", fmt_vec(&config.h_eff()));
    meta.put("n_h", fmt_vec(&config.n_h()));
    meta.put("lambda", config.lambda().map_or("inf".to_string(), |l| l.to_string()));
    meta.put("psi", config.psi());
    if let Ok(p) = stationary_purity(&config) {
        meta.put("gamma_st", p);
    }
    Ok(config)
}

/// Time axis: values in 1/Γ unless raw units are requested.
fn time_axis(time: &TimeArgs, config: &DrivenConfig, raw: bool, meta: &mut Meta) -> Result<(Vec<f64>, f64), CliError> {
    let tau_max = time.tau_max.unwrap_or(20.0);
    let steps = time.tau_steps.unwrap_or(401);
    if !(tau_max > 0.0) || steps < 2 {
        return Err(KondoError::InvalidInput(format!("time grid up to {tau_max} with {steps} points")).into());
    }
    meta.put("tau_max", tau_max);
    meta.put("tau_steps", steps);
    meta.put("time_unit", if raw { "raw" } else { "1/Gamma" });
    let scale = if raw {
        1.0
    } else {
        1.0 / config.require_dissipation().map(|_| config.gamma())?
    };
    Ok((uniform_grid(0.0, tau_max, steps), scale))
}

fn output_path(cli_out: &Option<PathBuf>, default_name: &str) -> Option<PathBuf> {
    let path = cli_out.clone().unwrap_or_else(|| PathBuf::from(default_name));
    if path.as_os_str() == "-" {
        return None;
    }
    match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) if path.is_relative() => Some(PathBuf::from(dir).join(path)),
        _ => Some(path),
    }
}

fn write_csv(path: Option<PathBuf>, meta: &Meta, header: &[&str], rows: &[Vec<f64>]) -> Result<(), CliError> {
    let mut buf = Vec::new();
    for (k, v) in &meta.0 {
        writeln!(buf, "# {k} = {v}")?;
    }
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(header)?;
        for row in rows {
            w.write_record(row.iter().map(|x| x.to_string()))?;
        }
        w.flush()?;
    }
    match path {
        None => io::stdout().write_all(&buf)?,
        Some(p) => fs::write(&p, &buf).map_err(|e| CliError::Output(format!("{}: {e}", p.display())))?,
    }
    Ok(())
}

fn unit_or(v: Option<Vec3>, default: Vec3) -> Vec3 {
    v.unwrap_or(default)
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let mut file = FileValues {
        map: match &cli.config {
            Some(p) => read_config_file(p)?,
            None => BTreeMap::new(),
        },
    };
    let raw = cli.raw_units;
    let mut meta = Meta(Vec::new());
    match cli.command {
        Command::Dynamics { mut model, mut s0, mut time } => {
            model.merge(&mut file)?;
            file.fill(&mut s0, "s0", parse_vec3)?;
            time.merge(&mut file)?;
            file.finish()?;
            meta.put("command", "dynamics");
            let config = build_config(&model, &mut meta)?;
            let s0 = s0.unwrap_or_else(Vec3::zeros);
            meta.put("s0", fmt_vec(&s0));
            let (grid, scale) = time_axis(&time, &config, raw, &mut meta)?;
            let t_max = grid[grid.len() - 1] * scale;
            let traj = evolve_trajectory(&config, &BlochVector::new(s0)?, t_max, grid.len())?;
            let rows: Vec<Vec<f64>> = grid
                .iter()
                .zip(traj.states.iter().zip(&traj.purities))
                .map(|(t, (s, p))| {
                    let s = s.s();
                    vec![*t, s.x, s.y, s.z, *p]
                })
                .collect();
            write_csv(output_path(&cli.out, "dynamics.csv"), &meta, &["t", "Sx", "Sy", "Sz", "purity"], &rows)
        }
        Command::Spectrum { mut model, mut grid } => {
            model.merge(&mut file)?;
            grid.merge(&mut file)?;
            file.finish()?;
            meta.put("command", "spectrum");
            let config = build_config(&model, &mut meta)?;
            let nu = grid.grid()?;
            let s = spectrum_unresolved(&config, &nu)?;
            meta.put("elastic_weight", s.elastic_weight);
            let rows: Vec<Vec<f64>> = s.nu_grid.iter().zip(&s.inelastic).map(|(a, b)| vec![*a, *b]).collect();
            write_csv(output_path(&cli.out, "spectrum.csv"), &meta, &["nu", "inelastic_density"], &rows)
        }
        Command::SpectrumResolved { mut model, mut nd, mut grid } => {
            model.merge(&mut file)?;
            file.fill(&mut nd, "nd", parse_vec3)?;
            grid.merge(&mut file)?;
            file.finish()?;
            meta.put("command", "spectrum-resolved");
            let config = build_config(&model, &mut meta)?;
            let nd = nd.ok_or_else(|| CliError::Usage("missing --nd".into()))?;
            meta.put("nd", fmt_vec(&nd));
            let s = spectrum_resolved(&config, &nd, &grid.grid()?)?;
            meta.put("elastic_weight_unresolved", s.base.elastic_weight);
            meta.put("elastic_weight", s.elastic_weight);
            let g1 = s.g1();
            let rows: Vec<Vec<f64>> = (0..g1.len())
                .map(|k| vec![s.base.nu_grid[k], s.base.inelastic[k], s.vector_part[k], g1[k]])
                .collect();
            write_csv(
                output_path(&cli.out, "spectrum_resolved.csv"),
                &meta,
                &["nu", "unresolved", "vector_part", "g1"],
                &rows,
            )
        }
        Command::Ellipticity { mut model, mut ratio_min, mut ratio_max, mut ratio_steps } => {
            model.merge(&mut file)?;
            file.fill(&mut ratio_min, "ratio-min", parse_f64)?;
            file.fill(&mut ratio_max, "ratio-max", parse_f64)?;
            file.fill(&mut ratio_steps, "ratio-steps", parse_usize)?;
            file.finish()?;
            meta.put("command", "ellipticity");
            if model.ncl.is_none() && model.alpha_plus.is_none() {
                model.ncl = Some(Vec3::x());
            }
            if model.f.is_none() && model.alpha_plus.is_none() {
                model.f = Some(1.0);
            }
            let base = build_config(&model, &mut meta)?;
            let (lo, hi, n) = (ratio_min.unwrap_or(-10.0), ratio_max.unwrap_or(10.0), ratio_steps.unwrap_or(201));
            if !(hi > lo) || n < 2 {
                return Err(KondoError::InvalidInput(format!("ratio grid [{lo}, {hi}] with {n} points")).into());
            }
            meta.put("ratio_min", lo);
            meta.put("ratio_max", hi);
            meta.put("ratio_steps", n);
            let omega0 = base.lamb_shift();
            let mut rows = Vec::with_capacity(n);
            for ratio in uniform_grid(lo, hi, n) {
                let p = base.params();
                let c = build_driven_config(KondoParams::new(p.j, p.f, ratio * omega0, p.omega0)?, base.n_cl())?;
                rows.push(vec![ratio, ellipticity(&c)?]);
            }
            write_csv(output_path(&cli.out, "ellipticity.csv"), &meta, &["delta_over_omega0", "theta_deg"], &rows)
        }
        Command::G2 { mut model, mut n, mut m, mut time } => {
            model.merge(&mut file)?;
            file.fill(&mut n, "n", parse_vec3)?;
            file.fill(&mut m, "m", parse_vec3)?;
            time.merge(&mut file)?;
            file.finish()?;
            meta.put("command", "g2");
            let config = build_config(&model, &mut meta)?;
            let (n, m) = (unit_or(n, config.n_cl()), unit_or(m, config.n_cl()));
            meta.put("n", fmt_vec(&n));
            meta.put("m", fmt_vec(&m));
            let (grid, scale) = time_axis(&time, &config, raw, &mut meta)?;
            let taus: Vec<f64> = grid.iter().map(|t| t * scale).collect();
            let curve = g2_curve(&config, &n, &m, &taus)?;
            let rows: Vec<Vec<f64>> = grid.iter().zip(&curve.values).map(|(t, g)| vec![*t, *g]).collect();
            write_csv(output_path(&cli.out, "g2.csv"), &meta, &["tau", "g2"], &rows)
        }
        Command::Validate { mut seed } => {
            file.fill(&mut seed, "seed", parse_u64)?;
            file.finish()?;
            let seed = seed.unwrap_or(2024);
            meta.put("command", "validate");
            meta.put("seed", seed);
            let reports = run_all(seed)?;
            let target = output_path(&cli.out, "validate.csv");
            let mut failed = 0;
            let mut rows = Vec::new();
            for r in &reports {
                if target.is_some() {
                    println!("{r}");
                } else {
                    eprintln!("{r}");
                }
                failed += usize::from(!r.passed());
                rows.push(vec![r.samples as f64, r.max_deviation, r.tolerance, f64::from(u8::from(r.passed()))]);
            }
            let mut buf = Vec::new();
            for (k, v) in &meta.0 {
                writeln!(buf, "# {k} = {v}")?;
            }
            {
                let mut w = csv::Writer::from_writer(&mut buf);
                w.write_record(["check", "samples", "max_deviation", "tolerance", "passed"])?;
                for (r, row) in reports.iter().zip(&rows) {
                    let mut rec = vec![r.name.to_string()];
                    rec.extend(row.iter().map(|x| x.to_string()));
                    w.write_record(&rec)?;
                }
                w.flush()?;
            }
            match target {
                None => io::stdout().write_all(&buf)?,
                Some(p) => fs::write(&p, &buf).map_err(|e| CliError::Output(format!("{}: {e}", p.display())))?,
            }
            if failed > 0 {
                return Err(CliError::ValidationFailed(failed));
            }
            Ok(())
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code; diagnostics go to stderr as a single line.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.exit_code()
        }
    }
}
