//! Command-line front end.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails, 2 for usage
//! errors and inputs the constructions reject.

use std::f64::consts::SQRT_2;
use std::ffi::OsString;
use std::io::Write;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use rand::Rng;

use crate::bloch::{pc_check, to_operator, BlochVector, Outcome};
use crate::discrimination::{clone_protocol, discriminate, hyperplane_discs, hyperplane_pair};
use crate::error::Error;
use crate::highdim::{build_nu_state, build_violating_state, discriminate_highdim, nu_overlap, violates_pc, NuFamily};
use crate::nonlocal::{
    build_box, chsh_value, closed_form_box, correlation_table, run_box_pipeline, SettingsChoice, TSIRELSON_BOUND,
};
use crate::operator::{expectation, hermitian_eigensystem, kron, ARITH_TOL, SPECTRAL_TOL};
use crate::report::{emit_report, Check, Format, Real, RunReport, Table, Value};
use crate::sampling::{self, DEFAULT_SEED};
use crate::verify;

#[derive(Debug, Parser)]
#[command(
    name = "quasistate",
    version,
    about = "Complementarity-violating quasi-states: boxes, discrimination, cloning"
)]
pub struct Cli {
    /// Output format (reports default to json, sweeps and plot data to csv).
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Seed for randomized parts of a run.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,

    /// Record wall-clock duration in the report.
    #[arg(long, global = true)]
    pub timing: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SettingsArg {
    Auto,
    Tsirelson,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PhasesArg {
    Zero,
    Random,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Complementarity test for a Bloch vector.
    PcCheck {
        #[arg(long, value_parser = parse_triple, allow_hyphen_values = true)]
        r: [f64; 3],
    },
    /// Build the bipartite box from a Bloch vector and evaluate CHSH.
    Box {
        #[arg(long, value_parser = parse_triple, allow_hyphen_values = true)]
        r: [f64; 3],
        #[arg(long, value_enum, default_value_t = SettingsArg::Auto)]
        settings: SettingsArg,
    },
    /// CHSH value over a grid of resource norms.
    ChshSweep {
        #[arg(long)]
        r_min: f64,
        #[arg(long)]
        r_max: f64,
        #[arg(long)]
        steps: usize,
    },
    /// Discriminate the two hyperplane states of a violating resource.
    Discriminate {
        #[arg(long, value_parser = parse_triple, allow_hyphen_values = true)]
        r: [f64; 3],
        #[arg(long, allow_hyphen_values = true)]
        y: f64,
        #[arg(long, allow_hyphen_values = true)]
        z: f64,
        /// Number of randomly hidden labels to identify.
        #[arg(long, default_value_t = 1)]
        trials: usize,
    },
    /// Discriminate, then prepare two copies of each hyperplane state.
    CloneDemo {
        #[arg(long, value_parser = parse_triple, allow_hyphen_values = true)]
        r: [f64; 3],
        #[arg(long, allow_hyphen_values = true)]
        y: f64,
        #[arg(long, allow_hyphen_values = true)]
        z: f64,
    },
    /// d-dimensional violating state, nu families and their discrimination.
    Highdim {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        epsilon: f64,
        /// Comma-separated remaining eigenvalues (must sum to -epsilon).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        lambdas: Option<Vec<f64>>,
        #[arg(long, value_enum, default_value_t = PhasesArg::Zero)]
        phases: PhasesArg,
    },
    /// The two planes r.x = +/-1 as plot data.
    Planes {
        #[arg(long, value_parser = parse_triple, allow_hyphen_values = true)]
        r: [f64; 3],
        #[arg(long, default_value_t = crate::bloch::DEFAULT_CIRCLE_SAMPLES)]
        samples: usize,
    },
    /// Run every acceptance criterion.
    VerifyAll,
}

fn parse_triple(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected X,Y,Z, got {s:?}"));
    }
    let mut out = [0.0; 3];
    for (slot, p) in out.iter_mut().zip(parts) {
        *slot = p.parse::<f64>().map_err(|e| format!("{p:?}: {e}"))?;
        if !slot.is_finite() {
            return Err(format!("{p:?} is not finite"));
        }
    }
    Ok(out)
}

fn triple(v: [f64; 3]) -> String {
    format!("{},{},{}", v[0], v[1], v[2])
}

/// Parses arguments, runs the command and writes the report to `out`.
pub fn run<I, T>(args: I, out: &mut impl Write, err: &mut impl Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let rendered = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{rendered}");
            } else {
                let _ = write!(err, "{rendered}");
            }
            return code;
        }
    };
    let format = cli.format.unwrap_or(match cli.command {
        Command::ChshSweep { .. } | Command::Planes { .. } => Format::Csv,
        _ => Format::Json,
    });
    let start = Instant::now();
    let mut report = match execute(&cli) {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return 2;
        }
    };
    if cli.timing {
        report.duration_ms = Some(Real::new(start.elapsed().as_secs_f64() * 1e3));
    }
    let _ = write!(out, "{}", emit_report(&report, format));
    if report.all_passed() {
        0
    } else {
        let _ = writeln!(err, "failed checks: {}", report.failing().join(", "));
        1
    }
}

fn execute(cli: &Cli) -> Result<RunReport, Error> {
    match &cli.command {
        Command::PcCheck { r } => Ok(pc_check_report(*r)),
        Command::Box { r, settings } => box_report(*r, *settings),
        Command::ChshSweep { r_min, r_max, steps } => sweep_report(*r_min, *r_max, *steps),
        Command::Discriminate { r, y, z, trials } => discriminate_report(*r, *y, *z, *trials, cli.seed),
        Command::CloneDemo { r, y, z } => clone_report(*r, *y, *z),
        Command::Highdim { d, epsilon, lambdas, phases } => {
            highdim_report(*d, *epsilon, lambdas.as_deref(), *phases, cli.seed)
        }
        Command::Planes { r, samples } => planes_report(*r, *samples),
        Command::VerifyAll => Ok(verify_report(cli.seed)),
    }
}

fn pc_check_report(r: [f64; 3]) -> RunReport {
    let bloch = BlochVector::from_array(r);
    let pc = pc_check(&bloch);
    let state = to_operator(&bloch);
    let mut rep = RunReport::new("pc-check");
    rep.input("r", triple(r))
        .output("norm", Value::real(pc.norm))
        .output("axis_expectations", Value::vector(pc.axis_expectations))
        .output("axis_sum", Value::real(pc.axis_sum))
        .output("min_eigenvalue", Value::real(state.min_eigenvalue()))
        .output("satisfies_pc", Value::Flag(pc.satisfies))
        .check(Check::with_verdict("complementarity", pc.satisfies, pc.norm - 1.0, ARITH_TOL))
        .check(Check::within("axis_sum_equals_norm_squared", (pc.axis_sum - pc.norm * pc.norm).abs(), ARITH_TOL));
    rep
}

fn box_report(r: [f64; 3], choice: SettingsArg) -> Result<RunReport, Error> {
    let bloch = BlochVector::from_array(r);
    let norm = bloch.norm();
    let choice = match choice {
        SettingsArg::Tsirelson => SettingsChoice::Tsirelson,
        // the flat box has no preferred settings
        SettingsArg::Auto if norm == 0.0 => SettingsChoice::Tsirelson,
        SettingsArg::Auto => SettingsChoice::Auto,
    };
    let settings = choice.settings(norm)?;
    let pipeline = run_box_pipeline(&bloch);
    let bx = build_box(&bloch);
    let chsh = chsh_value(&bx, &settings);
    let table = correlation_table(&bx, &settings);
    let spectrum = hermitian_eigensystem(bx.matrix())?;

    let mut rep = RunReport::new("box");
    rep.input("r", triple(r))
        .input("settings", if choice == SettingsChoice::Auto { "auto" } else { "tsirelson" })
        .output("norm", Value::real(norm))
        .output("chsh", Value::real(chsh))
        .output("tsirelson_bound", Value::real(TSIRELSON_BOUND))
        .output("box_eigenvalues", Value::vector(spectrum.eigenvalues.iter().copied()))
        .output("u_unitarity_defect", Value::real(pipeline.u.unitarity_defect()))
        .output("nonsignalling", Value::Flag(table.is_nonsignalling(ARITH_TOL)))
        .output("probabilities_valid", Value::Flag(table.all_valid()));
    for (name, s) in [("a1", settings.a1), ("a2", settings.a2), ("b1", settings.b1), ("b2", settings.b2)] {
        rep.output(&format!("setting_{name}"), Value::vector(s.to_array()));
    }

    let mut joint = Table::new(&["alice", "bob", "p_pp", "p_pm", "p_mp", "p_mm", "valid"]);
    let mut marginal_gap: f64 = 0.0;
    let mut excursion: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let d = &table.dists[i][j];
            joint.push([
                (i + 1) as f64,
                (j + 1) as f64,
                d.p[0][0],
                d.p[0][1],
                d.p[1][0],
                d.p[1][1],
                d.valid as u8 as f64,
            ]);
            for p in d.p.iter().flatten() {
                excursion = excursion.max(-p).max(p - 1.0);
            }
        }
        let (a0, a1) = (table.dists[i][0].marginal_a(), table.dists[i][1].marginal_a());
        let (b0, b1) = (table.dists[0][i].marginal_b(), table.dists[1][i].marginal_b());
        marginal_gap = marginal_gap.max((a0[0] - a1[0]).abs()).max((b0[0] - b1[0]).abs());
    }
    rep.table = Some(joint);

    rep.check(Check::within("nonsignalling", marginal_gap, ARITH_TOL))
        .check(Check::within("closed_form", pipeline.p_prime.max_abs_diff(&closed_form_box(norm)), SPECTRAL_TOL))
        .check(Check::within("probabilities_valid", excursion.max(0.0), ARITH_TOL));
    if choice == SettingsChoice::Auto {
        let expected = TSIRELSON_BOUND * norm.min(SQRT_2);
        rep.output("chsh_expected", Value::real(expected)).check(Check::within(
            "chsh_law",
            (chsh - expected).abs(),
            1e-9,
        ));
    }
    Ok(rep)
}

fn sweep_report(r_min: f64, r_max: f64, steps: usize) -> Result<RunReport, Error> {
    if !(r_min > 0.0 && r_max >= r_min && r_max.is_finite()) || steps == 0 {
        return Err(Error::InvalidArgument(format!(
            "need 0 < r-min <= r-max and steps >= 1 (got {r_min}, {r_max}, {steps})"
        )));
    }
    let grid: Vec<f64> = (0..steps)
        .map(|k| if steps == 1 { r_min } else { r_min + (r_max - r_min) * k as f64 / (steps - 1) as f64 })
        .collect();
    let mut table = Table::new(&["r", "chsh", "expected", "valid"]);
    let mut worst: f64 = 0.0;
    for &r in &grid {
        let bx = build_box(&BlochVector::new(0.0, 0.0, r));
        let settings = SettingsChoice::Auto.settings(r)?;
        let chsh = chsh_value(&bx, &settings);
        let expected = TSIRELSON_BOUND * r.min(SQRT_2);
        worst = worst.max((chsh - expected).abs());
        table.push([r, chsh, expected, correlation_table(&bx, &settings).all_valid() as u8 as f64]);
    }
    let mut rep = RunReport::new("chsh-sweep");
    rep.input("r_min", r_min).input("r_max", r_max).input("steps", steps);
    rep.table = Some(table);
    rep.check(Check::within("chsh_law", worst, 1e-9));
    Ok(rep)
}

fn discriminate_report(r: [f64; 3], y: f64, z: f64, trials: usize, seed: u64) -> Result<RunReport, Error> {
    let bloch = BlochVector::from_array(r);
    let pair = hyperplane_pair(&bloch, y, z)?;
    let plus = discriminate(&bloch, &pair, Outcome::Plus)?;
    let minus = discriminate(&bloch, &pair, Outcome::Minus)?;

    let mut rng = sampling::rng(seed);
    let mut correct = 0usize;
    for _ in 0..trials {
        let hidden = if rng.random::<bool>() { Outcome::Plus } else { Outcome::Minus };
        if discriminate(&bloch, &pair, hidden)?.label == hidden {
            correct += 1;
        }
    }
    let rate = if trials == 0 { 1.0 } else { correct as f64 / trials as f64 };
    let worst =
        (plus.q_plus - 1.0).abs().max((minus.q_minus - 1.0).abs()).max(plus.q_minus.abs()).max(minus.q_plus.abs());

    let mut rep = RunReport::new("discriminate");
    rep.input("r", triple(r))
        .input("y", y)
        .input("z", z)
        .input("trials", trials)
        .input("seed", seed)
        .output("r_plus", Value::vector(pair.r_plus.to_array()))
        .output("r_minus", Value::vector(pair.r_minus.to_array()))
        .output("overlap", Value::real(pair.overlap()))
        .output("q_plus_given_plus", Value::real(plus.q_plus))
        .output("q_minus_given_plus", Value::real(plus.q_minus))
        .output("q_plus_given_minus", Value::real(minus.q_plus))
        .output("q_minus_given_minus", Value::real(minus.q_minus))
        .output("success_rate", Value::real(rate))
        .check(Check::within("perfect_discrimination", worst, SPECTRAL_TOL))
        .check(Check::within("success_rate", 1.0 - rate, 0.0))
        .check(Check::with_verdict("non_orthogonal", pair.overlap() > 0.0, pair.overlap(), 0.0));
    Ok(rep)
}

fn clone_report(r: [f64; 3], y: f64, z: f64) -> Result<RunReport, Error> {
    let bloch = BlochVector::from_array(r);
    let pair = hyperplane_pair(&bloch, y, z)?;
    let mut rep = RunReport::new("clone-demo");
    rep.input("r", triple(r)).input("y", y).input("z", z);
    rep.output("overlap", Value::real(pair.overlap()));
    for (tag, which) in [("plus", Outcome::Plus), ("minus", Outcome::Minus)] {
        let out = clone_protocol(&bloch, &pair, which)?;
        let single = to_operator(&pair.state(which));
        let target = kron(single.matrix(), single.matrix());
        let fidelity = expectation(&target, &out.output)?;
        let purity = 0.5 * (1.0 + pair.state(which).norm().powi(2));
        rep.output(&format!("{tag}_state"), Value::vector(pair.state(which).to_array()))
            .output(&format!("{tag}_fidelity"), Value::real(fidelity))
            .output(&format!("{tag}_purity_squared"), Value::real(purity * purity))
            .check(Check::within(format!("{tag}_clone_matches"), out.output.matrix().max_abs_diff(&target), ARITH_TOL))
            .check(Check::within(format!("{tag}_fidelity"), (fidelity - purity * purity).abs(), ARITH_TOL));
    }
    Ok(rep)
}

fn highdim_report(
    d: usize,
    epsilon: f64,
    lambdas: Option<&[f64]>,
    phases: PhasesArg,
    seed: u64,
) -> Result<RunReport, Error> {
    let vs = build_violating_state(d, epsilon, lambdas)?;
    let mut rng = sampling::rng(seed);
    let phase_values = (phases == PhasesArg::Random).then(|| sampling::phases(&mut rng, d));
    let one = build_nu_state(&vs, NuFamily::One, phase_values.as_deref())?;
    let zero = build_nu_state(&vs, NuFamily::Zero, phase_values.as_deref())?;
    let on_one = expectation(vs.state.matrix(), &one.projector())?;
    let on_zero = expectation(vs.state.matrix(), &zero.projector())?;
    let a = discriminate_highdim(&vs, &one)?;
    let b = discriminate_highdim(&vs, &zero)?;

    let mut rep = RunReport::new("highdim");
    rep.input("d", d)
        .input("epsilon", epsilon)
        .input("phases", if phases == PhasesArg::Random { "random" } else { "zero" })
        .input("seed", seed);
    if let Some(l) = lambdas {
        rep.input("lambdas", l.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","));
    }
    rep.output("lambdas", Value::vector(vs.lambdas.iter().copied()))
        .output("nu1_weights", Value::vector(one.weights.iter().copied()))
        .output("nu0_weights", Value::vector(zero.weights.iter().copied()))
        .output("nu1_expectation", Value::real(on_one))
        .output("nu0_expectation", Value::real(on_zero))
        .output("q1_nu1", Value::real(a.q1))
        .output("q1_nu0", Value::real(b.q1))
        .output("overlap", Value::real(nu_overlap(&one, &zero)))
        .output("violates_pc", Value::Flag(violates_pc(&vs.state)))
        .check(Check::within("nu1_certain", (on_one - 1.0).abs(), SPECTRAL_TOL))
        .check(Check::within("nu0_impossible", on_zero.abs(), SPECTRAL_TOL))
        .check(Check::within("q1_nu1", (a.q1 - 1.0).abs(), SPECTRAL_TOL))
        .check(Check::within("q1_nu0", b.q1.abs(), SPECTRAL_TOL));
    Ok(rep)
}

fn planes_report(r: [f64; 3], samples: usize) -> Result<RunReport, Error> {
    if samples == 0 {
        return Err(Error::InvalidArgument("samples must be positive".into()));
    }
    let bloch = BlochVector::from_array(r);
    let discs = hyperplane_discs(&bloch)?;
    let mut table = Table::new(&["plane", "theta", "x", "y", "z"]);
    let mut worst: f64 = 0.0;
    for disc in &discs {
        for (theta, p) in disc.boundary(samples) {
            worst = worst.max((bloch.0.dot(&p) - disc.sign).abs()).max((p.norm() - 1.0).abs());
            table.push([disc.sign, theta, p.x, p.y, p.z]);
        }
    }
    let mut rep = RunReport::new("planes");
    rep.input("r", triple(r))
        .input("samples", samples)
        .output("normal", Value::vector(discs[0].normal.to_array()))
        .output("offsets", Value::vector(discs.iter().map(|d| d.offset)))
        .output("radius", Value::real(discs[0].radius))
        .output("center_plus", Value::vector(discs[0].center.into_iter().copied()))
        .output("center_minus", Value::vector(discs[1].center.into_iter().copied()))
        .check(Check::within("boundary_on_sphere_and_plane", worst, ARITH_TOL));
    rep.table = Some(table);
    Ok(rep)
}

fn verify_report(seed: u64) -> RunReport {
    let mut rep = RunReport::new("verify-all");
    rep.input("seed", seed);
    for result in verify::run_all(seed) {
        rep.output(&format!("criterion_{}_detail", result.id), Value::Text(result.detail.clone()));
        rep.check(result.to_check());
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("quasistate").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn triples_parse() {
        assert_eq!(parse_triple("0,0,1.5").unwrap(), [0.0, 0.0, 1.5]);
        assert_eq!(parse_triple(" -1, 2 ,0").unwrap(), [-1.0, 2.0, 0.0]);
        assert!(parse_triple("1,2").is_err());
        assert!(parse_triple("1,x,2").is_err());
        assert!(parse_triple("1,inf,2").is_err());
    }

    #[test]
    fn unknown_flag_is_a_usage_error() {
        let (code, _, err) = run_str(&["pc-check", "--bogus"]);
        assert_eq!(code, 2);
        assert!(err.contains("Usage"));
        let (code, _, _) = run_str(&["no-such-command"]);
        assert_eq!(code, 2);
    }

    #[test]
    fn rejected_input_exits_two() {
        let (code, _, err) = run_str(&["discriminate", "--r", "0,0,0.9", "--y", "0", "--z", "0"]);
        assert_eq!(code, 2);
        assert!(err.contains("does not violate"));
    }

    #[test]
    fn negative_components_are_accepted() {
        let (code, out, _) = run_str(&["pc-check", "--r", "-0.6,0,-0.8"]);
        assert_eq!(code, 0, "{out}");
    }
}
