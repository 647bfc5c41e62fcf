use std::path::{Path, PathBuf};

use besov_core::nterm::{dyadic_level, nterm_continuous, partial_sum_approx, sigma_n_exact, ApproxResult};
use besov_core::poisson::{benchmark_singularity_rates, BenchmarkSidecar};
use besov_core::widths::{reports_csv, reports_json, width_exponent, widths_table, RateReport, WidthFamily, WidthKind};
use besov_core::{
    besov_seq_norm, cube_structure, eval_corner_singularity, eval_radial_cusp, CornerSingularity, Execution, RadialCusp,
    SpaceParams, WaveletFamily, WeightedSequence,
};
use serde::Serialize;
use serde_json::json;

use crate::parse::{format_sig12, parse_angle, parse_n_list};
use crate::{family, CliError, FamilyArg, FunctionArg, Method};

pub fn execution(threads: Option<usize>) -> Result<Execution, CliError> {
    match threads {
        Some(0) => Err(CliError::Usage("--threads must be >= 1".into())),
        Some(1) => Ok(Execution::Sequential),
        #[cfg(feature = "parallel")]
        Some(t) => {
            // a pool may already exist when embedded; the global default is fine then
            let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
            Ok(Execution::Parallel)
        }
        #[cfg(not(feature = "parallel"))]
        Some(_) => Ok(Execution::Sequential),
        None => Ok(Execution::default()),
    }
}

fn space(text: &str, flag: &str) -> Result<SpaceParams, CliError> {
    text.parse().map_err(|e| CliError::Usage(format!("{flag}: {e}")))
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    write(path, &text)
}

fn with_ext(prefix: &Path, ext: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

fn load_sequence(path: &Path, d: u32) -> Result<WeightedSequence, CliError> {
    let text = read(path)?;
    if text.trim().is_empty() {
        return Ok(WeightedSequence::zero(cube_structure(d, 0)?));
    }
    Ok(WeightedSequence::from_text(&text)?)
}

pub struct NormArgs {
    pub input: PathBuf,
    pub space: String,
    pub json: Option<PathBuf>,
}

pub fn norm(args: NormArgs) -> Result<bool, CliError> {
    let params = space(&args.space, "--space")?;
    let a = load_sequence(&args.input, params.d)?;
    let v = besov_seq_norm(&a, &params)?;
    println!("{}", format_sig12(v));
    if let Some(path) = &args.json {
        write_json(
            path,
            &json!({
                "command": "norm",
                "input": args.input.display().to_string(),
                "space": params.to_string(),
                "norm": v,
            }),
        )?;
    }
    Ok(true)
}

pub struct ApproxArgs {
    pub input: PathBuf,
    pub n: usize,
    pub method: Method,
    pub source: Option<String>,
    pub target: String,
    pub out: Option<PathBuf>,
    pub json: Option<PathBuf>,
}

pub fn approx(args: ApproxArgs) -> Result<bool, CliError> {
    let target = space(&args.target, "--target")?;
    let a = load_sequence(&args.input, target.d)?;
    let source = args.source.as_deref().map(|s| space(s, "--source")).transpose()?;
    let result: ApproxResult = match args.method {
        Method::Exact => sigma_n_exact(&a, args.n, &target)?,
        Method::Partial => partial_sum_approx(&a, args.n, &target)?,
        Method::Continuous => {
            let source = source.ok_or_else(|| CliError::Usage("method continuous needs --source".into()))?;
            nterm_continuous(&a, args.n, &source, &target)?
        }
    };
    println!("error {}", format_sig12(result.error));
    println!("terms {}", result.term_count);
    if let Some(out) = &args.out {
        write(out, &result.to_text())?;
    }
    if let Some(path) = &args.json {
        let method = match args.method {
            Method::Exact => "exact",
            Method::Continuous => "continuous",
            Method::Partial => "partial",
        };
        write_json(
            path,
            &json!({
                "command": "approx",
                "input": args.input.display().to_string(),
                "method": method,
                "n": args.n,
                "source": source.map(|s| s.to_string()),
                "target": target.to_string(),
                "error": result.error,
                "term_count": result.term_count,
            }),
        )?;
    }
    Ok(true)
}

pub struct WidthsArgs {
    pub source: String,
    pub target: String,
    pub n: String,
    pub family: FamilyArg,
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
    pub kinds: String,
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct TheoryRow {
    kind: &'static str,
    exponent: besov_core::TheoryExponent,
}

pub fn widths(args: WidthsArgs, exec: Execution) -> Result<bool, CliError> {
    let source = space(&args.source, "--source")?;
    let target = space(&args.target, "--target")?;
    let ns = parse_n_list(&args.n)?;
    let kinds: Vec<WidthKind> = args
        .kinds
        .split(',')
        .map(|k| k.parse::<WidthKind>().map_err(|e| CliError::Usage(e.to_string())))
        .collect::<Result<_, _>>()?;
    if kinds.is_empty() {
        return Err(CliError::Usage("--kinds is empty".into()));
    }
    let theory: Vec<TheoryRow> = kinds
        .iter()
        .map(|k| width_exponent(*k, &source, &target).map(|e| TheoryRow { kind: k.name(), exponent: e }))
        .collect::<Result<_, _>>()?;

    let family = match args.family {
        FamilyArg::Extremal => WidthFamily::Extremal,
        FamilyArg::Random => {
            let top = dyadic_level(*ns.iter().max().unwrap_or(&1), source.d) + 2;
            let st = cube_structure(source.d, top)?;
            WidthFamily::Samples(family::random_unit_ball(&source, &st, args.samples.max(1), args.seed)?)
        }
    };
    let empirical: Vec<&str> = kinds.iter().filter(|k| matches!(k, WidthKind::Linear | WidthKind::NTerm)).map(|k| k.name()).collect();
    let reports: Vec<RateReport> = if empirical.is_empty() {
        Vec::new()
    } else {
        widths_table(&source, &target, &ns, &family, args.tol, exec)?
            .into_iter()
            .filter(|r| empirical.contains(&r.kind.as_str()))
            .collect()
    };
    let pass = reports.iter().all(|r| r.pass != Some(false));

    let csv = reports_csv(&reports, None);
    let family_name = match args.family {
        FamilyArg::Extremal => "extremal",
        FamilyArg::Random => "random",
    };
    let summary = json!({
        "command": "widths",
        "source": source.to_string(),
        "target": target.to_string(),
        "n": ns,
        "family": family_name,
        "samples": if args.family == FamilyArg::Random { Some(args.samples) } else { None },
        "seed": args.seed,
        "tolerance": args.tol,
        "theory": theory,
        "reports": reports_json(&reports),
        "pass": pass,
    });
    match &args.out {
        Some(prefix) => {
            write(&with_ext(prefix, "csv"), &csv)?;
            write_json(&with_ext(prefix, "json"), &summary)?;
            for r in &reports {
                println!(
                    "{} fitted {:.4} theory {} {}",
                    r.kind,
                    r.fitted_exponent,
                    r.theory_exponent.map(|t| t.to_string()).unwrap_or_default(),
                    if r.pass == Some(false) { "FAIL" } else { "ok" }
                );
            }
        }
        None => print!("{csv}"),
    }
    Ok(pass)
}

pub struct PoissonArgs {
    pub function: FunctionArg,
    pub omega: String,
    pub m: u32,
    pub cutoff: Option<f64>,
    pub alpha: f64,
    pub beta: f64,
    pub dim: u32,
    pub level: u32,
    pub n: Option<String>,
    pub wavelet: String,
    pub t_nominal: f64,
    pub min_gap: f64,
    pub out: Option<PathBuf>,
}

pub fn poisson(args: PoissonArgs, exec: Execution) -> Result<bool, CliError> {
    let family: WaveletFamily = args.wavelet.parse()?;
    let (name, f, corner, cusp) = match args.function {
        FunctionArg::Corner => {
            let cs = CornerSingularity::new(
                parse_angle(&args.omega)?,
                args.m,
                args.cutoff.unwrap_or(besov_core::poisson::DEFAULT_CUTOFF_RADIUS),
            )?;
            ("corner", eval_corner_singularity(&cs, args.level, exec)?, Some(cs), None)
        }
        FunctionArg::Cusp => {
            let rc = RadialCusp::new(args.alpha, args.beta, args.cutoff.unwrap_or(0.5))?;
            if args.level < 3 {
                return Err(CliError::Usage(format!("grid level must be >= 3, got {}", args.level)));
            }
            ("cusp", eval_radial_cusp(&rc, args.dim, args.level, exec)?, None, Some(rc))
        }
    };
    let d = f.d();
    let ns = match &args.n {
        Some(spec) => parse_n_list(spec)?,
        None => {
            let top = args.level.saturating_sub(3).max(3);
            (1..=top).map(|k| 1usize << (k * d)).collect()
        }
    };
    let bench = benchmark_singularity_rates(&f, &family, args.t_nominal, &ns, exec)?;
    let dominated = bench.nonlinear.samples.iter().zip(&bench.linear.samples).all(|(a, b)| a.1 <= b.1);
    let pass = bench.gap >= args.min_gap && dominated;
    let mut reports = vec![bench.nonlinear.clone(), bench.linear.clone()];
    for r in &mut reports {
        r.pass = Some(pass);
    }
    let csv = reports_csv(&reports, Some(name));
    let sidecar = BenchmarkSidecar {
        function: name.into(),
        corner,
        cusp,
        grid_level: args.level,
        family: family.to_string(),
        t_nominal: args.t_nominal,
        n: ns.clone(),
        gap: bench.gap,
    };
    let summary = json!({
        "command": "poisson",
        "generator": sidecar,
        "reports": reports_json(&reports),
        "gap": bench.gap,
        "min_gap": args.min_gap,
        "nonlinear_dominates": dominated,
        "pass": pass,
    });
    match &args.out {
        Some(prefix) => {
            write(&with_ext(prefix, "csv"), &csv)?;
            write_json(&with_ext(prefix, "json"), &summary)?;
            println!(
                "{name}: nonlinear {:.4} linear {:.4} gap {:.4} {}",
                bench.nonlinear.fitted_exponent,
                bench.linear.fitted_exponent,
                bench.gap,
                if pass { "ok" } else { "FAIL" }
            );
        }
        None => print!("{csv}"),
    }
    Ok(pass)
}
