//! End-to-end acceptance checks. Prints one line per criterion and exits
//! nonzero if any fails.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use besov_core::nterm::{apply_plan, plan_thresholds};
use besov_core::wavelet::FamilyName;
use besov_core::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

/// Largest measured `sup_n error·n^{t/d}` over the continuous-scheme trials
/// was 0.39; the pinned bound leaves headroom for other seeds.
const CONTINUOUS_ERROR_CONSTANT: f64 = 1.0;

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn within(elapsed: Duration, limit: Duration, mut o: Outcome) -> Outcome {
    o.detail = format!("{} [{:.2}s, limit {}s]", o.detail, elapsed.as_secs_f64(), limit.as_secs());
    o.pass &= elapsed <= limit;
    o
}

fn random_sparse(rng: &mut ChaCha20Rng, st: LevelStructure, max_support: usize) -> WeightedSequence {
    let slots: Vec<Index> = st.levels().flat_map(|j| st.indices(j).collect::<Vec<_>>()).collect();
    let k = rng.random_range(0..=max_support.min(slots.len()));
    let mut map = BTreeMap::new();
    while map.len() < k {
        let idx = slots[rng.random_range(0..slots.len())];
        map.insert(idx, rng.random_range(-1.0..1.0f64) * 10f64.powf(rng.random_range(-3.0..3.0)));
    }
    WeightedSequence::from_map(st, &map).unwrap()
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    let cases: Vec<(WeightedSequence, SpaceParams)> = (0..500)
        .map(|_| {
            let d = rng.random_range(1..=2u32);
            let st = cube_structure(d, if d == 1 { 4 } else { 2 }).unwrap();
            let s = rng.random_range(-1.0..2.0);
            (random_sparse(&mut rng, st, 12), SpaceParams::hilbert(s, d))
        })
        .collect();
    let worst = Execution::default().map(&cases, |(a, target)| {
        (0..=12usize)
            .map(|n| {
                let fast = sigma_n_exact(a, n, target).unwrap().error;
                let slow = sigma_n_bruteforce(a, n, target).unwrap().error;
                (fast - slow).abs() / slow.max(f64::MIN_POSITIVE)
            })
            .fold(0.0f64, f64::max)
    });
    let worst = worst.into_iter().fold(0.0f64, f64::max);
    check(worst <= 1e-12, format!("500 sequences, n = 0..12, worst relative difference {worst:.2e}"))
}

fn sweep(p: f64) -> Vec<RateReport> {
    let source = SpaceParams::finite(1.5, p, p, 1);
    let target = SpaceParams::hilbert(0.0, 1);
    let ns: Vec<usize> = (4..=13).map(|k| 1usize << k).collect();
    widths_table(&source, &target, &ns, &WidthFamily::Extremal, 0.15, Execution::default()).unwrap()
}

fn slope(reports: &[RateReport], kind: &str) -> f64 {
    reports.iter().find(|r| r.kind == kind).unwrap().fitted_exponent
}

fn nonlinear_rate() -> Outcome {
    let s = slope(&sweep(1.0), "NTerm");
    check((s + 1.5).abs() <= 0.15, format!("NTerm slope {s:.4}, expected -1.5 +- 0.15"))
}

fn linear_rate_and_gap() -> Outcome {
    let r = sweep(1.0);
    let (lin, nl) = (slope(&r, "Linear"), slope(&r, "NTerm"));
    let gap = lin - nl;
    check(
        (lin + 1.0).abs() <= 0.15 && gap >= 0.35,
        format!("Linear slope {lin:.4} (expected -1.0 +- 0.15), gap {gap:.4} (need >= 0.35)"),
    )
}

fn coincidence_at_p2() -> Outcome {
    let r = sweep(2.0);
    let (lin, nl) = (slope(&r, "Linear"), slope(&r, "NTerm"));
    check((lin - nl).abs() <= 0.15, format!("p0 = 2: NTerm {nl:.4}, Linear {lin:.4}"))
}

fn unit_ball_sample(rng: &mut ChaCha20Rng, st: LevelStructure, source: &SpaceParams) -> WeightedSequence {
    let u: f64 = rng.random_range(0.0..2.0);
    let e = source.level_exponent();
    let mut map = BTreeMap::new();
    for j in st.levels() {
        let scale = (-(j.max(0) as f64) * (e + u)).exp2();
        for _ in 0..rng.random_range(1..=st.cardinality(j).min(32)) {
            let idx = Index::new(j, rng.random_range(st.channel_range(j)), rng.random_range(0..st.lattice_count(j)));
            map.insert(idx, rng.random_range(-1.0..1.0f64) * scale);
        }
    }
    let a = WeightedSequence::from_map(st, &map).unwrap();
    let norm = besov_seq_norm(&a, source).unwrap();
    a.scaled(1.0 / norm)
}

fn continuous_scheme() -> Outcome {
    let source = SpaceParams::finite(1.5, 1.0, 1.0, 1);
    let target = SpaceParams::hilbert(0.0, 1);
    let st = cube_structure(1, 14).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(5);
    let samples: Vec<WeightedSequence> = (0..100).map(|_| unit_ball_sample(&mut rng, st, &source)).collect();
    let (mut count_ratio, mut err_const, mut lipschitz) = (0.0f64, 0.0f64, 0.0f64);
    let mut finite = true;
    for a in &samples {
        for k in 1..=10 {
            let n = 1usize << k;
            let plan = plan_thresholds(n, &source, &target).unwrap();
            let r = apply_plan(a, &plan, &target);
            count_ratio = count_ratio.max(r.term_count as f64 / n as f64);
            err_const = err_const.max(r.error * (n as f64).powf(1.5));
            let h = a.map_values(|idx, v| 1e-7 * (v + (idx.lattice % 3) as f64 * 1e-3));
            let moved = apply_plan(&a.axpy(1.0, &h).unwrap(), &plan, &target);
            let num = besov_seq_norm(&moved.approximant.axpy(-1.0, &r.approximant).unwrap(), &target).unwrap();
            let den = besov_seq_norm(&h, &target).unwrap();
            let ratio = num / den;
            finite &= ratio.is_finite();
            lipschitz = lipschitz.max(ratio);
        }
    }
    check(
        count_ratio <= 8.0 && err_const <= CONTINUOUS_ERROR_CONSTANT && finite,
        format!(
            "max terms/n {count_ratio:.3} (<= 8), sup error*n^1.5 {err_const:.4} (<= {CONTINUOUS_ERROR_CONSTANT}), \
             finite-difference Lipschitz {lipschitz:.4}"
        ),
    )
}

fn gluskin_checks() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(6);
    let mut ok = true;
    for _ in 0..200 {
        let m = rng.random_range(1..=100_000u64);
        let n = rng.random_range(1..=m);
        ok &= gluskin_gelfand(m, n, 2.0).unwrap().value == 1.0;
    }
    let mut monotone = true;
    for _ in 0..1000 {
        let m = rng.random_range(2..=10_000u64);
        let n = rng.random_range(1..m);
        let p = 10f64.powf(rng.random_range(-0.7..1.3));
        let a = gluskin_gelfand(m, n, p).unwrap().value;
        let b = gluskin_gelfand(m, n + 1, p).unwrap().value;
        monotone &= b <= a * (1.0 + 1e-12);
    }
    let mut worst_jump = 1.0f64;
    for _ in 0..1000 {
        let m = rng.random_range(2..=10_000u64);
        let p = rng.random_range(1.0..2.0);
        let inv_pp = 1.0 - 1.0 / p;
        let n0 = (m as f64).powf(2.0 * inv_pp).ceil() as u64;
        if n0 < 2 || n0 > m {
            continue;
        }
        let right = gluskin_gelfand(m, n0, p).unwrap().value;
        let left = gluskin_gelfand(m, n0 - 1, p).unwrap().value;
        worst_jump = worst_jump.max(left / right);
    }
    let continuous = worst_jump <= 2.0;
    check(
        ok && monotone && continuous,
        format!("p=2 branch == 1: {ok}, monotone on 1000 triples: {monotone}, worst ratio at boundary {worst_jump:.4}"),
    )
}

fn wavelet_round_trip() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(7);
    let families = [WaveletFamily::haar(), WaveletFamily::spline(2, 2).unwrap(), WaveletFamily::spline(3, 3).unwrap()];
    let (mut worst_rt, mut worst_parseval) = (0.0f64, 0.0f64);
    for i in 0..100 {
        let d = rng.random_range(1..=2u32);
        let level = rng.random_range(1..=10u32);
        let n = 1usize << (level * d);
        let samples: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let f = GridFunction::new(d, level, samples).unwrap();
        let fam = &families[i % families.len()];
        let a = analyze(&f, fam).unwrap();
        let g = synthesize(&a, fam, level).unwrap();
        let err = f.samples().iter().zip(g.samples()).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        worst_rt = worst_rt.max(err / f.max_abs());
        if fam.name() == FamilyName::Haar {
            let coeff: f64 = a.entries().iter().map(|e| e.1 * e.1).sum();
            let grid = f.l2_norm().powi(2);
            worst_parseval = worst_parseval.max((coeff - grid).abs() / grid);
        }
    }
    check(
        worst_rt <= 1e-10 && worst_parseval <= 1e-10,
        format!("100 grids: worst relative reconstruction error {worst_rt:.2e}, Haar Parseval defect {worst_parseval:.2e}"),
    )
}

fn limiting_case() -> Outcome {
    let source = SpaceParams::finite(0.5, 1.0, 1.0, 1);
    let target = SpaceParams::hilbert(0.0, 1);
    let st = cube_structure(1, 19).unwrap();
    // Σ_L 2^{-L/2} (unit-norm flat level L): finite source norm
    let inside: Vec<(Index, f64)> =
        (0..=19).flat_map(|l| st.indices(l).map(move |i| (i, (-1.5 * l as f64).exp2())).collect::<Vec<_>>()).collect();
    // ranked values k^{-0.6}: σ_n ~ n^{-0.1}, so the functional grows like n^{0.4}
    let outside: Vec<(Index, f64)> = (0..=19)
        .flat_map(|l| st.indices(l).collect::<Vec<_>>())
        .enumerate()
        .map(|(k, i)| (i, ((k + 1) as f64).powf(-0.6)))
        .collect();
    let growth = |entries: Vec<(Index, f64)>| {
        let a = WeightedSequence::new(st, entries).unwrap();
        let f1 = limiting_case_functional(&a, &source, &target, 1 << 10).unwrap();
        let f2 = limiting_case_functional(&a, &source, &target, 1 << 11).unwrap();
        f2 / f1 - 1.0
    };
    let (gi, go) = (growth(inside), growth(outside));
    check(gi < 0.05 && go > 0.20, format!("growth 2^10 -> 2^11: in-space {:.2}%, out-of-space {:.2}%", gi * 100.0, go * 100.0))
}

fn poisson_benchmark() -> Outcome {
    let f = eval_corner_singularity(&CornerSingularity::l_shape(), 10, Execution::default()).unwrap();
    let family = WaveletFamily::spline(3, 3).unwrap();
    let ns: Vec<usize> = (1..=7).map(|k| 1usize << (2 * k)).collect();
    let b = benchmark_singularity_rates(&f, &family, 1.0, &ns, Execution::default()).unwrap();
    let dominated = b.nonlinear.samples.iter().zip(&b.linear.samples).all(|(x, y)| x.0 == y.0 && x.1 <= y.1);
    check(
        b.gap >= 0.2 && dominated,
        format!(
            "L=10, {family}: nonlinear {:.4}, linear {:.4}, gap {:.4} (need >= 0.2), pointwise nonlinear <= linear: {dominated}",
            b.nonlinear.fitted_exponent, b.linear.fitted_exponent, b.gap
        ),
    )
}

struct Run {
    stdout: Vec<u8>,
    files: Vec<(String, Vec<u8>)>,
    code: Option<i32>,
}

fn run_cli(dir: &Path, args: &[&str], outputs: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_besov")).current_dir(dir).args(args).output().expect("spawn besov");
    let files = outputs
        .iter()
        .map(|f| (f.to_string(), std::fs::read(dir.join(f)).unwrap_or_default()))
        .collect();
    Run { stdout: out.stdout, files, code: out.status.code() }
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    std::fs::write(
        p.join("seq.txt"),
        "#besovseq d=1 jmin=-1 jmax=3\n-1\t0\t0\t0.5\n0\t1\t0\t3\n1\t1\t1\t-4\n3\t1\t5\t0.25\n",
    )
    .unwrap();
    std::fs::write(p.join("run.toml"), "seed = 11\nsamples = 8\nfamily = \"random\"\nsource = \"1.5,1,1,1\"\ntarget = \"0,2,2,1\"\nn = \"2^3..2^9\"\n").unwrap();
    let commands: Vec<(Vec<&str>, Vec<&str>)> = vec![
        (vec!["norm", "--input", "seq.txt", "--space", "0.5,1.5,2,1", "--json", "norm.json"], vec!["norm.json"]),
        (
            vec!["approx", "--input", "seq.txt", "--n", "2", "--method", "continuous", "--source", "1.5,1,1,1", "--target", "0,2,2,1", "--out", "ap.txt", "--json", "ap.json"],
            vec!["ap.txt", "ap.json"],
        ),
        (vec!["--config", "run.toml", "widths", "--out", "w"], vec!["w.csv", "w.json"]),
        (vec!["widths", "--source", "1.5,2,2,1", "--target", "0,2,2,1", "--family", "random", "--seed", "3", "--samples", "4"], vec![]),
        (vec!["poisson", "--level", "8", "--n", "4^1..4^5", "--out", "p"], vec!["p.csv", "p.json"]),
    ];
    let mut identical = true;
    let mut codes = Vec::new();
    for (args, outputs) in &commands {
        let first = run_cli(p, args, outputs);
        let second = run_cli(p, args, outputs);
        identical &= first.stdout == second.stdout && first.files == second.files && first.code == second.code;
        identical &= matches!(first.code, Some(0 | 1)) && first.files.iter().all(|f| !f.1.is_empty());
        codes.push(first.code.unwrap_or(-1));
    }
    check(identical, format!("{} commands run twice, byte-identical outputs: {identical}, exit codes {codes:?}", commands.len()))
}

fn main() {
    type Criterion = (&'static str, fn() -> Outcome, u64);
    let criteria: [Criterion; 10] = [
        ("oracle equivalence", oracle_equivalence, 30),
        ("nonlinear rate", nonlinear_rate, 60),
        ("linear rate and gap", linear_rate_and_gap, 60),
        ("p >= 2 coincidence", coincidence_at_p2, 60),
        ("continuous scheme contract", continuous_scheme, 60),
        ("Gelfand formula", gluskin_checks, 60),
        ("wavelet round trip", wavelet_round_trip, 120),
        ("limiting case", limiting_case, 60),
        ("poisson benchmark", poisson_benchmark, 300),
        ("determinism", determinism, 300),
    ];
    let mut failed = 0;
    for (i, (name, f, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let outcome = within(start.elapsed(), Duration::from_secs(*limit), outcome);
        println!("criterion {:>2} {:<28} {}  {}", i + 1, name, if outcome.pass { "PASS" } else { "FAIL" }, outcome.detail);
        if !outcome.pass {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all {} acceptance criteria passed", criteria.len());
}
