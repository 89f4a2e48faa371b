//! `psearch`: command-line front end for the partial-search workbench.
//!
//! Every subcommand prints one JSON report to standard output; `--csv PATH`
//! adds a CSV dump where a time series or landscape exists. Exit codes:
//! 0 success, 2 invalid flags or inputs, 3 search budget refusal, 4
//! unwritable output path.

use psearch::parallel;
use psearch::report;

use std::collections::HashMap;
use std::path::Path;
use std::process::ExitCode;

use psearch_core::control::{
    compression_report, endpoint_checks, first_switch_y, generators, lie_closure_residual,
    phi_arc_x, phi_arc_y, simulate_extremal_with, switching_family, tau_x, BangControl,
    ExtremalOptions,
};
use psearch_core::grk::{iteration_counts, optimal_alpha, optimal_eta, run_grk};
use psearch_core::linalg::Vec3;
use psearch_core::optimizer::{
    compare_patterns_on, continuum_grk_schedule, pattern_string, PatternOptimum, TerminalPlane,
};
use psearch_core::oracle::compare_with_reduced_capped;
use psearch_core::reduced::{DatabaseGeometry, OperatorWord};
use psearch_core::rng::SplitMix64;
use psearch_core::search::{GlgOutcome, SearchBudget, SearchPlan, SearchReport};

use report::{obj, write_atomic, Csv, CsvCell, Json};

const USAGE: &str = "\
psearch - partial-search workbench

USAGE:
  psearch <SUBCOMMAND> [--flag value ...]

SUBCOMMANDS:
  grk-params      Closed-form parameters. Flags: --k K  |  --n N --m M
  grk-run         One refined three-step run. Flags: --n N --m M
  brute           Exhaustive word search. Flags: --n N --m M --max-len L
                  --epsilon E [--threads T] [--max-words W] [--csv PATH]
  glg-scan        Scan the three-step family. Flags: --n N --m M
                  --k1-max A --k2-max B --epsilon E
  oracle-compare  Full-space vs reduced dynamics. Flags: --n N --m M
                  --target T --word GLG... [--cap BITS]
  control-verify  Generator identities and arc reports. Flags: --k K
  extremal        Bang-bang trajectory simulation. Flags: --k K --horizon T
                  [--p0 x,y,z] [--psi0 x,y,z] [--sample-dt D] [--csv PATH]
  extremal-opt    Minimum-time arc schedules. Flags: --k K --max-switches S
                  [--plane direct|reflected] [--b BLOCK_SIZE] [--json]

OUTPUT:
  JSON on stdout; CSV time series / landscapes via --csv.
  PSEARCH_THREADS sets the default worker count for brute.

EXIT CODES:
  0 success, 2 invalid flags, 3 budget refusal, 4 unwritable output
";

enum CliError {
    Usage(String),
    Budget(String),
    Output(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Budget(_) => 3,
            CliError::Output(_) => 4,
        }
    }
}

fn usage_error(message: impl Into<String>) -> CliError {
    CliError::Usage(message.into())
}

struct Flags {
    values: HashMap<String, String>,
    json_flag: bool,
}

impl Flags {
    fn parse(args: &[String], allowed: &[&str]) -> Result<Flags, CliError> {
        let mut values = HashMap::new();
        let mut json_flag = false;
        let mut i = 0;
        while i < args.len() {
            let token = &args[i];
            let name = token
                .strip_prefix("--")
                .ok_or_else(|| usage_error(format!("unexpected argument {token:?}")))?;
            if name == "json" {
                json_flag = true;
                i += 1;
                continue;
            }
            if !allowed.contains(&name) {
                return Err(usage_error(format!("unknown flag --{name}")));
            }
            let value = args
                .get(i + 1)
                .ok_or_else(|| usage_error(format!("flag --{name} needs a value")))?;
            values.insert(name.to_string(), value.clone());
            i += 2;
        }
        Ok(Flags { values, json_flag })
    }

    fn get(&self, name: &str) -> Option<&str> {
        self.values.get(name).map(|s| s.as_str())
    }

    fn require(&self, name: &str) -> Result<&str, CliError> {
        self.get(name).ok_or_else(|| usage_error(format!("missing required flag --{name}")))
    }

    fn parse_value<T: std::str::FromStr>(&self, name: &str) -> Result<T, CliError> {
        let raw = self.require(name)?;
        raw.parse().map_err(|_| usage_error(format!("flag --{name}: cannot parse {raw:?}")))
    }

    fn parse_optional<T: std::str::FromStr>(&self, name: &str) -> Result<Option<T>, CliError> {
        match self.get(name) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|_| usage_error(format!("flag --{name}: cannot parse {raw:?}"))),
        }
    }
}

fn geometry_from(flags: &Flags) -> Result<DatabaseGeometry, CliError> {
    let n: u32 = flags.parse_value("n")?;
    let m: u32 = flags.parse_value("m")?;
    DatabaseGeometry::new(n, m).map_err(|e| usage_error(e.to_string()))
}

fn gamma_from_block_count(block_count: f64) -> Result<f64, CliError> {
    if !(block_count >= 2.0) {
        return Err(usage_error(format!("--k must be >= 2, got {block_count}")));
    }
    Ok((1.0 / block_count.sqrt()).asin())
}

fn parse_vec3(raw: &str, name: &str) -> Result<Vec3, CliError> {
    let parts: Vec<&str> = raw.split(',').collect();
    if parts.len() != 3 {
        return Err(usage_error(format!("flag --{name}: expected x,y,z")));
    }
    let mut out = [0.0; 3];
    for (slot, part) in out.iter_mut().zip(&parts) {
        *slot = part
            .trim()
            .parse()
            .map_err(|_| usage_error(format!("flag --{name}: cannot parse {part:?}")))?;
    }
    Ok(out)
}

fn write_csv_if_requested(flags: &Flags, contents: Option<String>) -> Result<(), CliError> {
    if let Some(path) = flags.get("csv") {
        let contents = contents
            .ok_or_else(|| usage_error("this subcommand produces no CSV output".to_string()))?;
        write_atomic(Path::new(path), &contents)
            .map_err(|e| CliError::Output(format!("cannot write {path}: {e}")))?;
    }
    Ok(())
}

/// Warnings from the numeric layers (e.g. norm-drift renormalization) go to
/// standard error; reports on standard output stay machine-readable.
struct StderrLogger;

impl log::Log for StderrLogger {
    fn enabled(&self, metadata: &log::Metadata) -> bool {
        metadata.level() <= log::Level::Warn
    }

    fn log(&self, record: &log::Record) {
        if self.enabled(record.metadata()) {
            eprintln!("{}: {}", record.level().to_string().to_lowercase(), record.args());
        }
    }

    fn flush(&self) {}
}

static LOGGER: StderrLogger = StderrLogger;

fn main() -> ExitCode {
    let _ = log::set_logger(&LOGGER).map(|()| log::set_max_level(log::LevelFilter::Warn));
    let args: Vec<String> = std::env::args().skip(1).collect();
    match run(&args) {
        Ok(json) => {
            println!("{json}");
            ExitCode::SUCCESS
        }
        Err(error) => {
            match &error {
                CliError::Usage(message) => {
                    eprintln!("error: {message}\n\n{USAGE}");
                }
                CliError::Budget(message) => eprintln!("error: {message}"),
                CliError::Output(message) => eprintln!("error: {message}"),
            }
            ExitCode::from(error.code())
        }
    }
}

fn run(args: &[String]) -> Result<String, CliError> {
    let subcommand = args.first().ok_or_else(|| usage_error("missing subcommand"))?;
    let rest = &args[1..];
    match subcommand.as_str() {
        "grk-params" => grk_params_cmd(rest),
        "grk-run" => grk_run_cmd(rest),
        "brute" => brute_cmd(rest),
        "glg-scan" => glg_scan_cmd(rest),
        "oracle-compare" => oracle_compare_cmd(rest),
        "control-verify" => control_verify_cmd(rest),
        "extremal" => extremal_cmd(rest),
        "extremal-opt" => extremal_opt_cmd(rest),
        "--help" | "help" => Err(usage_error("help requested")),
        other => Err(usage_error(format!("unknown subcommand {other:?}"))),
    }
}

fn grk_params_cmd(args: &[String]) -> Result<String, CliError> {
    let flags = Flags::parse(args, &["k", "n", "m"])?;
    if flags.get("k").is_some() {
        let block_count: f64 = flags.parse_value("k")?;
        let alpha = optimal_alpha(block_count).map_err(|e| usage_error(e.to_string()))?;
        let eta = optimal_eta(block_count).map_err(|e| usage_error(e.to_string()))?;
        return Ok(obj(vec![
            ("K", Json::Float(block_count)),
            ("alpha", Json::Float(alpha)),
            ("eta", Json::Float(eta)),
        ])
        .render());
    }
    let geom = geometry_from(&flags)?;
    let params = iteration_counts(&geom).map_err(|e| usage_error(e.to_string()))?;
    Ok(obj(vec![
        ("n", Json::UInt(geom.n as u64)),
        ("m", Json::UInt(geom.m as u64)),
        ("K", Json::Float(params.block_count)),
        ("alpha", Json::Float(params.alpha)),
        ("eta", Json::Float(params.eta)),
        ("k1", Json::UInt(params.k1)),
        ("k2", Json::UInt(params.k2)),
        ("predicted_queries", Json::Float(params.predicted_queries)),
    ])
    .render())
}

fn grk_run_cmd(args: &[String]) -> Result<String, CliError> {
    let flags = Flags::parse(args, &["n", "m"])?;
    let geom = geometry_from(&flags)?;
    let run = run_grk(&geom).map_err(|e| usage_error(e.to_string()))?;
    Ok(obj(vec![
        ("n", Json::UInt(geom.n as u64)),
        ("m", Json::UInt(geom.m as u64)),
        ("K", Json::Float(run.params.block_count)),
        ("alpha", Json::Float(run.params.alpha)),
        ("eta", Json::Float(run.params.eta)),
        ("k1", Json::UInt(run.params.k1)),
        ("k2", Json::UInt(run.params.k2)),
        ("predicted_queries", Json::Float(run.params.predicted_queries)),
        ("queries", Json::UInt(run.queries)),
        ("residual_amplitude", Json::Float(run.residual_amplitude)),
        ("residual_probability", Json::Float(run.residual_probability)),
        (
            "target_block_probability",
            Json::Float(run.final_state.target_block_probability()),
        ),
        (
            "final_state",
            Json::Array(run.final_state.components.iter().map(|&x| Json::Float(x)).collect()),
        ),
    ])
    .render())
}

fn glg_json(outcome: &GlgOutcome) -> Json {
    obj(vec![
        ("k1", Json::UInt(outcome.k1)),
        ("k2", Json::UInt(outcome.k2)),
        ("residual_probability", Json::Float(outcome.residual_probability)),
        ("queries", Json::UInt(outcome.queries)),
        ("achieved_epsilon", Json::Bool(outcome.achieved_epsilon)),
    ])
}

fn search_report_json(report: &SearchReport) -> Json {
    let mut fields = vec![
        ("n", Json::UInt(report.n as u64)),
        ("m", Json::UInt(report.m as u64)),
        ("epsilon", Json::Float(report.epsilon)),
        ("max_len", Json::UInt(report.max_len as u64)),
        ("found", Json::Bool(report.best.is_some())),
    ];
    match &report.best {
        Some(best) => {
            let structure = best.word.runs();
            fields.push(("best_word", Json::Str(best.word.to_string())));
            fields.push(("best_length", Json::UInt(best.word.len() as u64)));
            fields.push(("best_residual", Json::Float(best.residual_probability)));
            fields.push((
                "structure",
                Json::Array(
                    structure
                        .iter()
                        .map(|(letter, count)| {
                            Json::Array(vec![
                                Json::Str(letter.symbol().to_string()),
                                Json::UInt(*count as u64),
                            ])
                        })
                        .collect(),
                ),
            ));
            fields.push(("switching_count", Json::UInt(best.word.switching_count() as u64)));
        }
        None => {
            fields.push(("best_word", Json::Null));
            fields.push(("best_length", Json::Null));
            fields.push(("best_residual", Json::Null));
            fields.push(("structure", Json::Null));
            fields.push(("switching_count", Json::Null));
        }
    }
    fields.push(("words_examined", Json::UInt(report.words_examined)));
    fields.push((
        "glg_best",
        report.glg_best.as_ref().map(glg_json).unwrap_or(Json::Null),
    ));
    obj(fields)
}

fn brute_cmd(args: &[String]) -> Result<String, CliError> {
    let flags = Flags::parse(args, &["n", "m", "max-len", "epsilon", "threads", "max-words", "csv"])?;
    let geom = geometry_from(&flags)?;
    let max_len: u32 = flags.parse_value("max-len")?;
    let epsilon: f64 = flags.parse_value("epsilon")?;
    let threads = parallel::resolve_thread_count(flags.parse_optional("threads")?);
    let budget = match flags.parse_optional::<u64>("max-words")? {
        Some(max_words) => SearchBudget { max_words },
        None => SearchBudget::default(),
    };

    let plan = SearchPlan::prepare(&geom, max_len, epsilon, budget)
        .map_err(|e| CliError::Budget(e.to_string()))?;
    let report = parallel::run_plan(&plan, threads);

    // Optional CSV: the residual landscape of the three-step family within
    // the same total-query cap.
    if flags.get("csv").is_some() {
        let mut csv = Csv::new("k1,k2,residual_probability");
        if max_len >= 1 {
            for k1 in 0..=(max_len - 1) as u64 {
                for k2 in 0..=(max_len as u64 - 1 - k1) {
                    let residual = psearch_core::grk::glg_residual_probability(&geom, k1, k2);
                    csv.row(&[CsvCell::UInt(k1), CsvCell::UInt(k2), CsvCell::Float(residual)]);
                }
            }
        }
        write_csv_if_requested(&flags, Some(csv.into_string()))?;
    }

    Ok(search_report_json(&report).render())
}

fn glg_scan_cmd(args: &[String]) -> Result<String, CliError> {
    let flags = Flags::parse(args, &["n", "m", "k1-max", "k2-max", "epsilon"])?;
    let geom = geometry_from(&flags)?;
    let k1_max: u64 = flags.parse_value("k1-max")?;
    let k2_max: u64 = flags.parse_value("k2-max")?;
    let epsilon: f64 = flags.parse_value("epsilon")?;
    let outcome = psearch_core::search::glg_scan(&geom, k1_max, k2_max, epsilon);
    Ok(obj(vec![
        ("n", Json::UInt(geom.n as u64)),
        ("m", Json::UInt(geom.m as u64)),
        ("epsilon", Json::Float(epsilon)),
        ("k1_max", Json::UInt(k1_max)),
        ("k2_max", Json::UInt(k2_max)),
        ("best", glg_json(&outcome)),
    ])
    .render())
}

fn oracle_compare_cmd(args: &[String]) -> Result<String, CliError> {
    let flags = Flags::parse(args, &["n", "m", "target", "word", "cap"])?;
    let n: u32 = flags.parse_value("n")?;
    let m: u32 = flags.parse_value("m")?;
    let target: u64 = flags.parse_value("target")?;
    let word: OperatorWord = flags
        .require("word")?
        .parse()
        .map_err(|e: psearch_core::reduced::WordParseError| usage_error(e.to_string()))?;
    let cap: u32 = flags.parse_optional("cap")?.unwrap_or(psearch_core::oracle::DEFAULT_BIT_CAP);
    let comparison = compare_with_reduced_capped(n, m, target, &word, cap)
        .map_err(|e| usage_error(e.to_string()))?;
    Ok(obj(vec![
        ("n", Json::UInt(n as u64)),
        ("m", Json::UInt(m as u64)),
        ("target", Json::UInt(target)),
        ("word", Json::Str(word.to_string())),
        ("deviation", Json::Float(comparison.deviation)),
        ("leakage", Json::Float(comparison.leakage)),
    ])
    .render())
}

fn control_verify_cmd(args: &[String]) -> Result<String, CliError> {
    let flags = Flags::parse(args, &["k"])?;
    let block_count: f64 = flags.parse_value("k")?;
    let gamma = gamma_from_block_count(block_count)?;
    let s = gamma.sin();

    let (x, y) = generators(gamma).map_err(|e| usage_error(e.to_string()))?;
    let (f1, f2, f3) = switching_family(gamma).map_err(|e| usage_error(e.to_string()))?;
    let closure = lie_closure_residual(gamma).map_err(|e| usage_error(e.to_string()))?;

    // Universal switching map over a seeded sample of reduced data.
    let mut rng = SplitMix64::new(0x1d5c_9a2f);
    let mut x_map_residual = 0.0f64;
    let mut y_map_residual = 0.0f64;
    for _ in 0..16 {
        let a = rng.range(-2.0, 2.0);
        let b = rng.range(-2.0, 2.0);
        if a.abs() < 1e-3 {
            continue;
        }
        let x_end = phi_arc_x(a, b, gamma, tau_x(gamma));
        x_map_residual = x_map_residual
            .max(x_end.phi1.abs())
            .max((x_end.phi2 + a).abs())
            .max((x_end.phi3 - b).abs());
        let tau = first_switch_y(a, b).map_err(|e| usage_error(e.to_string()))?;
        let y_end = phi_arc_y(a, b, tau);
        y_map_residual = y_map_residual
            .max(y_end.phi1.abs())
            .max((y_end.phi2 + a).abs())
            .max((y_end.phi3 - b).abs());
    }

    // Arc-local conservation laws on a grid.
    let (a, b) = (0.8, -0.6);
    let mut x_conservation = 0.0f64;
    let mut y_offset = 0.0f64;
    let mut y_radius = 0.0f64;
    for k in 0..=400 {
        let t = 4.0 * std::f64::consts::PI / s * k as f64 / 400.0;
        let phi = phi_arc_x(a, b, gamma, t);
        x_conservation = x_conservation.max((phi.phi3 - s * s * phi.phi1 - b).abs());
        let phi = phi_arc_y(a, b, t);
        y_offset = y_offset.max((phi.phi3 - phi.phi1 - b).abs());
        y_radius = y_radius.max((phi.phi2 * phi.phi2 + phi.phi3 * phi.phi3 - (a * a + b * b)).abs());
    }

    let compression = compression_report(gamma, std::f64::consts::PI / 3.0)
        .map_err(|e| usage_error(e.to_string()))?;
    let endpoint = endpoint_checks(gamma, 10.0).map_err(|e| usage_error(e.to_string()))?;

    Ok(obj(vec![
        ("K", Json::Float(block_count)),
        ("gamma", Json::Float(gamma)),
        (
            "skewness_defects",
            obj(vec![
                ("x", Json::Float(x.skewness_defect())),
                ("y", Json::Float(y.skewness_defect())),
                ("f1", Json::Float(f1.skewness_defect())),
                ("f2", Json::Float(f2.skewness_defect())),
                ("f3", Json::Float(f3.skewness_defect())),
            ]),
        ),
        ("lie_closure_residual", Json::Float(closure)),
        ("tau_x", Json::Float(tau_x(gamma))),
        (
            "universal_map_residual",
            obj(vec![
                ("x_arc", Json::Float(x_map_residual)),
                ("y_arc", Json::Float(y_map_residual)),
            ]),
        ),
        (
            "arc_conservation_residual",
            obj(vec![
                ("x_offset", Json::Float(x_conservation)),
                ("y_offset", Json::Float(y_offset)),
                ("y_radius", Json::Float(y_radius)),
            ]),
        ),
        (
            "compression",
            obj(vec![
                ("y_length", Json::Float(compression.y_length)),
                ("yxy_block_length", Json::Float(compression.yxy_block_length)),
                ("xyx_block_length", Json::Float(compression.xyx_block_length)),
                ("x_replacement_length", Json::Float(compression.x_replacement_length)),
                ("y_replacement_length", Json::Float(compression.y_replacement_length)),
                ("yxy_gap", Json::Float(compression.yxy_gap)),
                ("xyx_gap", Json::Float(compression.xyx_gap)),
            ]),
        ),
        (
            "endpoint",
            obj(vec![
                ("tau", Json::Float(endpoint.tau)),
                ("y_drift_max", Json::Float(endpoint.y_drift_max)),
                ("x_u_at_tau", Json::Float(endpoint.x_u_at_tau)),
                ("x_closed_form_at_tau", Json::Float(endpoint.x_closed_form_at_tau)),
                ("x_deviation_max", Json::Float(endpoint.x_deviation_max)),
            ]),
        ),
    ])
    .render())
}

fn extremal_cmd(args: &[String]) -> Result<String, CliError> {
    let flags = Flags::parse(args, &["k", "horizon", "p0", "psi0", "sample-dt", "csv"])?;
    let block_count: f64 = flags.parse_value("k")?;
    let gamma = gamma_from_block_count(block_count)?;
    let horizon: f64 = flags.parse_value("horizon")?;
    if !(horizon > 0.0) {
        return Err(usage_error("--horizon must be positive"));
    }
    let s = gamma.sin();
    let c = gamma.cos();
    let psi0 = match flags.get("psi0") {
        Some(raw) => parse_vec3(raw, "psi0")?,
        None => [0.0, s, c],
    };
    let p0 = match flags.get("p0") {
        Some(raw) => parse_vec3(raw, "p0")?,
        None => [0.0, c, -s],
    };
    let mut options = ExtremalOptions::default();
    if let Some(dt) = flags.parse_optional::<f64>("sample-dt")? {
        if !(dt > 0.0) {
            return Err(usage_error("--sample-dt must be positive"));
        }
        options.sample_dt = dt;
    }

    let trajectory = simulate_extremal_with(gamma, psi0, p0, horizon, &options)
        .map_err(|e| usage_error(e.to_string()))?;

    if flags.get("csv").is_some() {
        let mut csv = Csv::new("t,psi_t,psi_ntt,psi_u,p1,p2,p3,phi1,phi2,phi3,control,H");
        for sample in &trajectory.samples {
            let control = match sample.control {
                BangControl::X => "X",
                BangControl::Y => "Y",
            };
            csv.row(&[
                CsvCell::Float(sample.t),
                CsvCell::Float(sample.state[0]),
                CsvCell::Float(sample.state[1]),
                CsvCell::Float(sample.state[2]),
                CsvCell::Float(sample.costate[0]),
                CsvCell::Float(sample.costate[1]),
                CsvCell::Float(sample.costate[2]),
                CsvCell::Float(sample.phi.phi1),
                CsvCell::Float(sample.phi.phi2),
                CsvCell::Float(sample.phi.phi3),
                CsvCell::Str(control),
                CsvCell::Float(sample.hamiltonian),
            ]);
        }
        write_csv_if_requested(&flags, Some(csv.into_string()))?;
    }

    let h0 = trajectory.samples.first().map(|s| s.hamiltonian).unwrap_or(0.0);
    let hamiltonian_drift = trajectory
        .samples
        .iter()
        .map(|s| (s.hamiltonian - h0).abs())
        .fold(0.0f64, f64::max);

    Ok(obj(vec![
        ("K", Json::Float(block_count)),
        ("gamma", Json::Float(gamma)),
        ("horizon", Json::Float(horizon)),
        ("psi0", Json::Array(psi0.iter().map(|&v| Json::Float(v)).collect())),
        ("p0", Json::Array(p0.iter().map(|&v| Json::Float(v)).collect())),
        ("sample_count", Json::UInt(trajectory.samples.len() as u64)),
        (
            "switch_times",
            Json::Array(trajectory.switch_times.iter().map(|&t| Json::Float(t)).collect()),
        ),
        (
            "arcs",
            Json::Array(
                trajectory
                    .arcs
                    .iter()
                    .map(|arc| {
                        obj(vec![
                            (
                                "control",
                                Json::Str(arc.control.symbol().to_string()),
                            ),
                            ("start_time", Json::Float(arc.start_time)),
                            ("duration", Json::Float(arc.duration)),
                            ("ends_at_switch", Json::Bool(arc.ends_at_switch)),
                        ])
                    })
                    .collect(),
            ),
        ),
        ("hamiltonian_drift", Json::Float(hamiltonian_drift)),
        (
            "singular_halt",
            trajectory.singular_halt.map(Json::Float).unwrap_or(Json::Null),
        ),
    ])
    .render())
}

fn pattern_row_json(row: &PatternOptimum) -> Json {
    obj(vec![
        ("requested", Json::Str(pattern_string(&row.requested))),
        (
            "durations",
            Json::Array(row.durations.iter().map(|&d| Json::Float(d)).collect()),
        ),
        ("total_time", Json::Float(row.total_time)),
        ("terminal_residual", Json::Float(row.terminal_residual)),
        ("pruned_pattern", Json::Str(pattern_string(&row.schedule.pattern))),
        (
            "pruned_durations",
            Json::Array(row.schedule.durations.iter().map(|&d| Json::Float(d)).collect()),
        ),
        ("switching_count", Json::UInt(row.schedule.switching_count() as u64)),
    ])
}

fn extremal_opt_cmd(args: &[String]) -> Result<String, CliError> {
    let flags = Flags::parse(args, &["k", "max-switches", "plane", "b"])?;
    let _ = flags.json_flag; // JSON is the default output; the flag is accepted.
    let block_count: f64 = flags.parse_value("k")?;
    let gamma = gamma_from_block_count(block_count)?;
    let max_switches: usize = flags.parse_value("max-switches")?;
    let plane = match flags.get("plane").unwrap_or("direct") {
        "direct" => TerminalPlane::Direct,
        "reflected" => TerminalPlane::Reflected,
        other => return Err(usage_error(format!("--plane must be direct or reflected, got {other:?}"))),
    };

    let comparison =
        compare_patterns_on(gamma, max_switches, plane).map_err(|e| usage_error(e.to_string()))?;
    let prediction = continuum_grk_schedule(block_count).map_err(|e| usage_error(e.to_string()))?;

    let query_equivalents = match flags.parse_optional::<f64>("b")? {
        Some(block_size) if block_size >= 2.0 => {
            let theta2 = (1.0 / block_size.sqrt()).asin();
            let best = comparison.best();
            let per_arc: Vec<Json> = best
                .schedule
                .durations
                .iter()
                .map(|&d| Json::Float(d / (2.0 * theta2)))
                .collect();
            obj(vec![
                ("block_size", Json::Float(block_size)),
                ("theta2", Json::Float(theta2)),
                ("queries_per_arc", Json::Array(per_arc)),
                (
                    "total_queries",
                    Json::Float(best.total_time / (2.0 * theta2)),
                ),
                // The discrete word spends one more query on its trailing
                // global step; its continuum time vanishes.
                ("trailing_global_step_queries", Json::UInt(1)),
            ])
        }
        Some(block_size) => {
            return Err(usage_error(format!("--b must be >= 2, got {block_size}")));
        }
        None => Json::Null,
    };

    Ok(obj(vec![
        ("K", Json::Float(block_count)),
        ("gamma", Json::Float(gamma)),
        (
            "plane",
            Json::Str(
                match plane {
                    TerminalPlane::Direct => "direct",
                    TerminalPlane::Reflected => "reflected",
                }
                .to_string(),
            ),
        ),
        ("max_switches", Json::UInt(max_switches as u64)),
        (
            "patterns",
            Json::Array(comparison.rows.iter().map(pattern_row_json).collect()),
        ),
        ("best_index", Json::UInt(comparison.best_index as u64)),
        ("best", pattern_row_json(comparison.best())),
        (
            "grk_prediction",
            obj(vec![
                ("t1", Json::Float(prediction.t1)),
                ("t2", Json::Float(prediction.t2)),
                ("total_time", Json::Float(prediction.total_time)),
            ]),
        ),
        ("query_equivalents", query_equivalents),
    ])
    .render())
}
