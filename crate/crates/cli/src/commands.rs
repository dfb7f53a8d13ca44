use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, ValueEnum};
use serde::Deserialize;

use sign_stable::collision::{
    bound_acos, exact_binary, exact_binary_mc, format_sig17, kernel_matrix, p_chi2_1, p_chi2_2,
    write_precomputed, KernelKind,
};
use sign_stable::similarity::{d_alpha, d_chi2, normalize, rho_2, rho_alpha, rho_chi2};
use sign_stable::simulate::{
    run_collision_experiment, run_file_experiment, write_csv, PairSelection, SimSpec,
};
use sign_stable::sketch::{
    read_sketch_file, read_updates, sketch_many, write_sketch_file, SketchRecord,
};
use sign_stable::stable::sample_stable;
use sign_stable::vector::read_vectors;
use sign_stable::verify::{verify_lemma, Lemma, VerifyBudget};
use sign_stable::{
    with_threads, BinaryProfile, Execution, LabeledVector, SeededRng, SketchConfig, StableParams,
    StreamSketchState,
};

use crate::Failure;

type Outcome = Result<(), Failure>;

fn open(path: &Path) -> Result<BufReader<File>, Failure> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

/// A file when a path is given, stdout otherwise.
fn output(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(create(p)?),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn load_vectors(path: &Path, dim: Option<usize>) -> Result<Vec<LabeledVector>, Failure> {
    read_vectors(open(path)?, dim).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn threaded<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    match threads {
        Some(n) => with_threads(n, f),
        None => f(),
    }
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    /// Stability index in (0, 2].
    #[arg(long)]
    alpha: f64,
    /// Skewness, 0 or 1.
    #[arg(long, default_value_t = 0.0)]
    beta: f64,
    /// Scale.
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    /// Number of variates.
    #[arg(short, long, default_value_t = 10)]
    n: usize,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn sample(a: SampleArgs, seed: u64) -> Outcome {
    let params = StableParams::new(a.alpha, a.beta, a.gamma)?;
    let xs = sample_stable(params, &SeededRng::new(seed, 0), a.n)?;
    let mut out = output(a.out.as_deref())?;
    for x in xs {
        writeln!(out, "{x}")?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Debug, Args)]
pub struct SketchArgs {
    /// Sparse text input, `label idx:val ...` with 1-based indices.
    #[arg(long)]
    input: PathBuf,
    /// Number of projections.
    #[arg(long, default_value_t = 1024)]
    k: usize,
    /// Stability index in (0, 2].
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Dimension; the largest index in the input when absent.
    #[arg(long)]
    dim: Option<usize>,
    /// Binary sketch output.
    #[arg(long)]
    out: PathBuf,
    /// Also write the 2k-slot 0/1 feature encoding in sparse text form.
    #[arg(long)]
    features: Option<PathBuf>,
    /// Worker threads.
    #[arg(long)]
    threads: Option<usize>,
}

pub fn sketch(a: SketchArgs, seed: u64) -> Outcome {
    let config = SketchConfig::new(a.k, a.alpha, seed)?;
    let vectors = load_vectors(&a.input, a.dim)?;
    let plain: Vec<_> = vectors.iter().map(|l| l.vector.clone()).collect();
    let sketches = threaded(a.threads, || sketch_many(&plain, &config, Execution::Parallel))?;
    let records: Vec<SketchRecord> = vectors
        .into_iter()
        .zip(sketches)
        .map(|(l, sketch)| SketchRecord {
            label: l.label,
            sketch,
        })
        .collect();
    let mut out = create(&a.out)?;
    write_sketch_file(&mut out, &config, &records)?;
    out.flush()?;
    if let Some(path) = a.features {
        let mut out = create(&path)?;
        for r in &records {
            write!(out, "{}", r.label)?;
            for idx in r.sketch.feature_indices() {
                write!(out, " {}:1", idx + 1)?;
            }
            writeln!(out)?;
        }
        out.flush()?;
    }
    Ok(())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct StreamConfig {
    alpha: f64,
    k: usize,
    seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct StreamArgs {
    /// TOML file with `alpha`, `k` and optionally `seed`; overrides the flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Stability index in (0, 2].
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Number of projections.
    #[arg(long, default_value_t = 1024)]
    k: usize,
    /// Updates CSV with header `t,i,increment`, 1-based `i`.
    #[arg(long)]
    updates: PathBuf,
    /// Binary sketch output holding one record.
    #[arg(long)]
    out: PathBuf,
    /// Record label.
    #[arg(long, default_value = "stream")]
    label: String,
}

pub fn stream(a: StreamArgs, seed: u64) -> Outcome {
    let (alpha, k, seed) = match &a.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
            let c: StreamConfig = toml::from_str(&text)
                .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
            if let Some(s) = c.seed {
                eprintln!("seed from config: {s}");
            }
            (c.alpha, c.k, c.seed.unwrap_or(seed))
        }
        None => (a.alpha, a.k, seed),
    };
    let config = SketchConfig::new(k, alpha, seed)?;
    let updates = read_updates(open(&a.updates)?)
        .map_err(|e| Failure::input(format!("{}: {e}", a.updates.display())))?;
    let mut state = StreamSketchState::new(config);
    for u in &updates {
        state.update(u.index, u.increment);
    }
    eprintln!("updates: {}, sum counter: {}", state.updates(), state.sum_counter());
    let mut out = create(&a.out)?;
    write_sketch_file(
        &mut out,
        &config,
        &[SketchRecord {
            label: a.label,
            sketch: state.signs(),
        }],
    )?;
    out.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Model {
    /// (1/π)·acos(ρ), with ρ = ρ_α.
    Bound,
    /// (1/π)·acos(ρ_χ²).
    #[value(name = "chi2-1")]
    Chi2First,
    /// The arctangent-integral approximation in ρ_χ².
    #[value(name = "chi2-2")]
    Chi2Second,
}

#[derive(Debug, Args)]
pub struct CollideArgs {
    /// Similarity argument of the model.
    #[arg(long, conflicts_with = "binary", required_unless_present = "binary")]
    rho: Option<f64>,
    /// Model evaluated at `--rho`.
    #[arg(long, value_enum, default_value_t = Model::Chi2Second)]
    model: Model,
    /// Exact probability for binary data with support counts `a,b,c`.
    #[arg(long, value_name = "A,B,C")]
    binary: Option<String>,
    /// Also estimate the binary probability with this many Monte Carlo draws.
    #[arg(long)]
    mc: Option<usize>,
}

fn parse_profile(s: &str) -> Result<BinaryProfile, Failure> {
    let parts: Vec<u64> = s
        .split(',')
        .map(|p| p.trim().parse::<u64>())
        .collect::<Result<_, _>>()
        .map_err(|_| Failure::input(format!("--binary expects three counts a,b,c, got {s:?}")))?;
    match parts[..] {
        [a, b, c] => Ok(BinaryProfile::new(a, b, c)),
        _ => Err(Failure::input(format!("--binary expects three counts a,b,c, got {s:?}"))),
    }
}

pub fn collide(a: CollideArgs, seed: u64) -> Outcome {
    if let Some(spec) = &a.binary {
        let profile = parse_profile(spec)?;
        println!("{}", exact_binary(profile)?);
        if let Some(n) = a.mc {
            let est = exact_binary_mc(profile, n, &SeededRng::new(seed, 0))?;
            println!("monte carlo {} +- {}", est.mean, est.std_err);
        }
        return Ok(());
    }
    let rho = a.rho.expect("clap requires --rho without --binary");
    let p = match a.model {
        Model::Bound => bound_acos(rho)?,
        Model::Chi2First => p_chi2_1(rho)?,
        Model::Chi2Second => p_chi2_2(rho)?,
    };
    println!("{p}");
    Ok(())
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Measure {
    /// χ² similarity of histograms.
    Chi2,
    /// χ² distance, 2 − 2ρ_χ².
    #[value(name = "d-chi2")]
    DChi2,
    /// Correlation ∑uv/√(∑u²∑v²).
    Rho2,
    /// Generalized correlation ρ_α.
    #[value(name = "rho-alpha")]
    RhoAlpha,
    /// ∑|u − v|^α.
    #[value(name = "d-alpha")]
    DAlpha,
}

#[derive(Debug, Args)]
pub struct SimilarityArgs {
    /// Sparse text input.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = Measure::Chi2)]
    measure: Measure,
    /// α for `rho-alpha` and `d-alpha`.
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Scale each vector to sum 1 first.
    #[arg(long)]
    normalize: bool,
    /// Pairs as `1-2,3-4` (1-based); every pair when absent.
    #[arg(long)]
    pairs: Option<String>,
}

fn parse_pairs(s: &str, n: usize) -> Result<PairSelection, Failure> {
    if s == "all" {
        return Ok(PairSelection::All);
    }
    let bad = || Failure::input(format!("pairs must look like 1-2,3-4, got {s:?}"));
    let mut out = Vec::new();
    for item in s.split(',') {
        let (i, j) = item.trim().split_once('-').ok_or_else(bad)?;
        let (i, j): (usize, usize) = (i.parse().map_err(|_| bad())?, j.parse().map_err(|_| bad())?);
        if i == 0 || j == 0 || i > n || j > n {
            return Err(Failure::input(format!("pair {i}-{j} out of range 1..={n}")));
        }
        out.push((i - 1, j - 1));
    }
    Ok(PairSelection::List(out))
}

fn pair_list(sel: &PairSelection, n: usize) -> Vec<(usize, usize)> {
    match sel {
        PairSelection::All => (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect(),
        PairSelection::List(l) => l.clone(),
    }
}

fn maybe_normalize(vectors: &mut [LabeledVector], on: bool) -> Outcome {
    if on {
        for l in vectors.iter_mut() {
            l.vector = normalize(&l.vector)
                .map_err(|e| Failure::input(format!("vector {:?}: {e}", l.label)))?;
        }
    }
    Ok(())
}

pub fn similarity(a: SimilarityArgs) -> Outcome {
    let mut vectors = load_vectors(&a.input, None)?;
    maybe_normalize(&mut vectors, a.normalize)?;
    let sel = match &a.pairs {
        Some(s) => parse_pairs(s, vectors.len())?,
        None => PairSelection::All,
    };
    let mut out = output(None)?;
    for (i, j) in pair_list(&sel, vectors.len()) {
        let (u, v) = (&vectors[i].vector, &vectors[j].vector);
        let value = match a.measure {
            Measure::Chi2 => rho_chi2(u, v)?,
            Measure::DChi2 => d_chi2(u, v)?,
            Measure::Rho2 => rho_2(u, v)?,
            Measure::RhoAlpha => rho_alpha(u, v, a.alpha)?,
            Measure::DAlpha => d_alpha(u, v, a.alpha)?,
        };
        writeln!(out, "{} {} {}", vectors[i].label, vectors[j].label, value)?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Kind {
    /// ρ_χ².
    Chi2,
    /// 1 − (1/π)·acos(ρ_χ²).
    #[value(name = "acos-chi2")]
    AcosChi2,
    /// ρ̂_χ² from sign Cauchy sketches.
    Estimated,
}

#[derive(Debug, Args)]
pub struct KernelArgs {
    /// Sparse text input.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = Kind::Chi2)]
    kind: Kind,
    /// Scale each vector to sum 1 first.
    #[arg(long)]
    normalize: bool,
    /// Projections for `estimated` when no sketch file is given.
    #[arg(long, default_value_t = 4096)]
    k: usize,
    /// Existing sketch file for `estimated`, records in input order.
    #[arg(long)]
    sketches: Option<PathBuf>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long)]
    threads: Option<usize>,
}

pub fn kernel(a: KernelArgs, seed: u64) -> Outcome {
    let mut vectors = load_vectors(&a.input, None)?;
    maybe_normalize(&mut vectors, a.normalize)?;
    let plain: Vec<_> = vectors.iter().map(|l| l.vector.clone()).collect();
    let matrix = threaded(a.threads, || -> Result<_, Failure> {
        Ok(match a.kind {
            Kind::Chi2 => kernel_matrix(&plain, KernelKind::Chi2, Execution::Parallel)?,
            Kind::AcosChi2 => kernel_matrix(&plain, KernelKind::AcosChi2, Execution::Parallel)?,
            Kind::Estimated => {
                let sketches = match &a.sketches {
                    Some(path) => read_sketch_file(open(path)?)?
                        .1
                        .into_iter()
                        .map(|r| r.sketch)
                        .collect(),
                    None => {
                        let config = SketchConfig::new(a.k, 1.0, seed)?;
                        sketch_many(&plain, &config, Execution::Parallel)?
                    }
                };
                kernel_matrix(&plain, KernelKind::EstimatedChi2(&sketches), Execution::Parallel)?
            }
        })
    })?;
    let labels: Vec<&str> = vectors.iter().map(|l| l.label.as_str()).collect();
    let mut out = output(a.out.as_deref())?;
    write_precomputed(&mut out, &labels, &matrix)?;
    out.flush()?;
    Ok(())
}

/// Comma-separated numbers.
#[derive(Debug, Clone)]
struct FloatList(Vec<f64>);

impl FromStr for FloatList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        s.split(',')
            .map(|x| x.trim().parse::<f64>().map_err(|_| format!("not a number: {x:?}")))
            .collect::<Result<_, _>>()
            .map(FloatList)
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Dimension of the generated vectors.
    #[arg(long = "D", default_value_t = 100)]
    dim: usize,
    /// Degrees of freedom of the bivariate t.
    #[arg(long, default_value_t = 1)]
    df: u32,
    /// Comma-separated stability indices.
    #[arg(long, default_value = "1.0", value_parser = FloatList::from_str)]
    alpha: FloatList,
    /// Probability that a generated entry is zeroed.
    #[arg(long, default_value_t = 0.0)]
    sparsity: f64,
    /// Sign projections per cell.
    #[arg(long, default_value_t = 100_000)]
    reps: usize,
    /// Points of the correlation grid over [0, 1].
    #[arg(long, default_value_t = 101)]
    grid: usize,
    /// Run on the pairs of this sparse text file instead of generated data.
    #[arg(long)]
    vectors: Option<PathBuf>,
    /// Pairs for `--vectors`: `all` or `1-2,3-4`.
    #[arg(long, default_value = "all")]
    pairs: String,
    /// Projections for `--vectors`.
    #[arg(long, default_value_t = 100_000)]
    k: usize,
    /// CSV output; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long)]
    threads: Option<usize>,
}

pub fn simulate(a: SimulateArgs, seed: u64) -> Outcome {
    let alphas = a.alpha.0.clone();
    let mut out = output(a.out.as_deref())?;
    if let Some(path) = &a.vectors {
        let vectors = load_vectors(path, None)?;
        let sel = parse_pairs(&a.pairs, vectors.len())?;
        let &[alpha] = alphas.as_slice() else {
            return Err(Failure::input("file experiments take a single --alpha"));
        };
        let points = threaded(a.threads, || {
            run_file_experiment(&vectors, &sel, a.k, alpha, seed, Execution::Parallel)
        })?;
        write_csv(&mut out, &points)?;
    } else {
        let spec = SimSpec {
            dim: a.dim,
            df: a.df,
            correlations: SimSpec::uniform_grid(a.grid),
            sparsity: a.sparsity,
            repetitions: a.reps,
            alphas,
            seed,
        };
        let points = threaded(a.threads, || run_collision_experiment(&spec, Execution::Parallel))?;
        write_csv(&mut out, &points)?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// `3`, `4`, `5`, `bound`, `factorization` or `all`.
    #[arg(long, default_value = "all")]
    lemma: String,
}

pub fn verify(a: VerifyArgs, seed: u64) -> Outcome {
    let lemmas: Vec<Lemma> = if a.lemma == "all" {
        Lemma::ALL.to_vec()
    } else {
        vec![a.lemma.parse()?]
    };
    let budget = VerifyBudget::default();
    let mut ok = true;
    for l in lemmas {
        let report = verify_lemma(l, seed, &budget)?;
        print!("{report}");
        if l == Lemma::ErrorMaximum {
            // The headline constants, in a form that is easy to grep.
            let t = sign_stable::collision::find_t_star()?;
            println!("t* = {}", format_sig17(t));
            println!("Z(t*) = {}", format_sig17(sign_stable::collision::error_surface(t, t)?));
        }
        ok &= report.passed();
    }
    io::stdout().flush()?;
    if ok {
        Ok(())
    } else {
        Err(Failure::checks_failed())
    }
}
