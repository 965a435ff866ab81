//! Argument parsing and dispatch for the `cpskit` binary.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use cpskit_core::apps::{bec_build, cauchy_build, mass_spring, overdamping_bound, qep_tensor};
use cpskit_core::completion::{fpc_complete, sample_mask, FpcParams};
use cpskit_core::decompose::{
    certify_cps_rank, cp_rank_bounds, cps_decompose, extended_pairs, matrix_decomposition, matrix_rank,
    nearest_rank_one, real_cps_grouped, real_partial_symmetric,
};
use cpskit_core::psd::{cone_report, general_psd, matrix_psd, vector_psd, Field, PsdStatus, PsdVerdict, SearchOptions};
use cpskit_core::random::{random_cps, random_low_rank};
use cpskit_core::{CpsTensor, SymmetryMode, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::format::{
    cnum, num, read_json, read_tensor, status_name, to_json, write_json, DecompositionFile, MaskFile, ReportJson,
    TensorFile, VerdictJson,
};
use crate::CliError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_COMPUTE: i32 = 2;
pub const EXIT_NOT_PSD: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "cpskit", version, about = "Conjugate partial-symmetric fourth-order tensor toolkit")]
pub struct Cli {
    /// Print machine-readable JSON instead of a summary.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate tensors.
    #[command(subcommand)]
    Gen(GenCmd),
    /// Decompose a tensor.
    #[command(subcommand)]
    Decompose(DecomposeCmd),
    /// Matrix rank, CP-rank bounds and Kruskal certificates.
    #[command(subcommand)]
    Rank(RankCmd),
    /// Positive semidefiniteness tests.
    #[command(subcommand)]
    Psd(PsdCmd),
    /// Low-rank approximation.
    #[command(subcommand)]
    Approx(ApproxCmd),
    /// Complete a partially observed tensor.
    Complete(CompleteArgs),
}

#[derive(Args, Debug)]
pub struct OutArg {
    /// Output file.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct Input {
    /// Tensor JSON file.
    pub file: PathBuf,
    /// Project the entries onto CPS symmetry instead of validating them.
    #[arg(long)]
    pub symmetrize: bool,
    /// Relative tolerance for dropping eigenvalues and terms.
    #[arg(long, default_value_t = cpskit_core::DEFAULT_RANK_TOL)]
    pub tol: f64,
}

impl Input {
    fn load(&self) -> Result<CpsTensor, CliError> {
        let mode = if self.symmetrize { SymmetryMode::Symmetrize } else { SymmetryMode::Validate };
        read_tensor(&self.file, mode)
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum BecPart {
    /// `B⊗I + I⊗B`.
    A,
    /// `α·ℐ + A`.
    F,
}

#[derive(Subcommand, Debug)]
pub enum GenCmd {
    /// Discretized BEC tensor.
    Bec {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long, value_enum, default_value = "a")]
        tensor: BecPart,
        #[command(flatten)]
        out: OutArg,
    },
    /// Cauchy tensor `1/(c_i + c_j + c_k + c_l)`.
    Cauchy {
        /// Comma-separated generating vector.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        c: Vec<f64>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Mass-spring QEP tensor `C⊗C − 2(M⊗K + K⊗M)`.
    Qep {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        tau: f64,
        #[arg(long)]
        mu: f64,
        #[command(flatten)]
        out: OutArg,
    },
    /// Basis tensor with one canonical orbit set.
    Basis {
        #[arg(long)]
        n: usize,
        #[arg(long, num_args = 4, required = true)]
        indices: Vec<usize>,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        re: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        im: f64,
        #[command(flatten)]
        out: OutArg,
    },
    /// Random tensor, optionally of prescribed matrix rank.
    Random {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        matrix_rank: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        complex: bool,
        #[command(flatten)]
        out: OutArg,
    },
}

#[derive(Subcommand, Debug)]
pub enum DecomposeCmd {
    /// Orthogonal matrix decomposition `Σ λ E⊗Ē`.
    Matrix(DecomposeArgs),
    /// Extended rank-one pairs.
    Pairs(DecomposeArgs),
    /// CPS decomposition `Σ λ a²⊗ā²`.
    Cps(DecomposeArgs),
    /// Real partially symmetric decomposition `Σ λ a⊗a⊗b⊗b`.
    Real(DecomposeArgs),
    /// Real grouped form: conjugate pairs and real quartics.
    RealGrouped(DecomposeArgs),
}

#[derive(Args, Debug)]
pub struct DecomposeArgs {
    #[command(flatten)]
    pub input: Input,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Subcommand, Debug)]
pub enum RankCmd {
    /// Rank of the square unfolding.
    Matrix(Input),
    /// Lower and upper CP-rank bounds.
    Bounds(Input),
    /// Kruskal uniqueness certificate of a CPS decomposition.
    Kruskal {
        /// Tensor file or `cps` decomposition file.
        file: PathBuf,
        #[arg(long)]
        symmetrize: bool,
        #[arg(long, default_value_t = cpskit_core::DEFAULT_RANK_TOL)]
        tol: f64,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FieldArg {
    Real,
    Complex,
}

impl From<FieldArg> for Field {
    fn from(f: FieldArg) -> Self {
        match f {
            FieldArg::Real => Field::Real,
            FieldArg::Complex => Field::Complex,
        }
    }
}

#[derive(Args, Debug)]
pub struct SearchArgs {
    #[arg(long, default_value_t = 64)]
    pub starts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 500)]
    pub max_iter: usize,
    /// Exit with status 3 when a counterexample is found.
    #[arg(long)]
    pub expect_psd: bool,
}

impl SearchArgs {
    fn options(&self, tol: f64) -> SearchOptions {
        SearchOptions { starts: self.starts, seed: self.seed, max_iter: self.max_iter, tol, ..Default::default() }
    }
}

#[derive(Subcommand, Debug)]
pub enum PsdCmd {
    /// Search for `x` with `A(x,x,x̄,x̄) < 0`.
    Vector {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum, default_value = "complex")]
        field: FieldArg,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Exact test on the square unfolding.
    Matrix {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        expect_psd: bool,
    },
    /// Search for PSD `X` with `⟨X, A X⟩ < 0`.
    General {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum, default_value = "complex")]
        field: FieldArg,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// All cones, closed under the implications between them.
    Hierarchy {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        search: SearchArgs,
        #[command(flatten)]
        out: OutArg,
    },
}

#[derive(Subcommand, Debug)]
pub enum ApproxCmd {
    /// Nearest `λ·X⊗X̄` in Frobenius norm.
    Rank1(Input),
}

#[derive(Args, Debug)]
pub struct CompleteArgs {
    /// Observed tensor; entries outside the mask are ignored.
    pub file: PathBuf,
    /// Mask JSON file.
    #[arg(long, conflicts_with = "fraction")]
    pub mask: Option<PathBuf>,
    /// Sample a random symmetric mask with this coverage instead.
    #[arg(long)]
    pub fraction: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub mu_start: Option<f64>,
    #[arg(long)]
    pub mu_final: Option<f64>,
    #[arg(long, default_value_t = 0.25)]
    pub mu_decay: f64,
    #[arg(long, default_value_t = 1.0)]
    pub step: f64,
    #[arg(long, default_value_t = 5000)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 1e-8)]
    pub rel_tol: f64,
    #[arg(long)]
    pub symmetrize: bool,
    /// Write the sampled mask here.
    #[arg(long)]
    pub mask_out: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutArg,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return code;
        }
    };
    let mut ctx = Ctx { json: cli.json, out: stdout };
    match dispatch(&mut ctx, cli.command) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_COMPUTE
        }
    }
}

struct Ctx<'a> {
    json: bool,
    out: &'a mut dyn Write,
}

impl Ctx<'_> {
    fn line(&mut self, s: impl AsRef<str>) -> Result<(), CliError> {
        writeln!(self.out, "{}", s.as_ref()).map_err(|e| CliError::Io("stdout".into(), e))
    }

    fn emit_json<T: serde::Serialize>(&mut self, v: &T) -> Result<(), CliError> {
        self.out.write_all(to_json(v).as_bytes()).map_err(|e| CliError::Io("stdout".into(), e))
    }
}

fn dispatch(ctx: &mut Ctx, cmd: Command) -> Result<i32, CliError> {
    match cmd {
        Command::Gen(g) => gen(ctx, g),
        Command::Decompose(d) => decompose(ctx, d),
        Command::Rank(r) => rank(ctx, r),
        Command::Psd(p) => psd(ctx, p),
        Command::Approx(ApproxCmd::Rank1(input)) => {
            let a = input.load()?;
            let r = nearest_rank_one(&a)?;
            if ctx.json {
                let x: Vec<Vec<[f64; 2]>> =
                    (0..a.n()).map(|i| (0..a.n()).map(|j| [r.x[(i, j)].re, r.x[(i, j)].im]).collect()).collect();
                ctx.emit_json(&json!({ "lambda": r.lambda, "x": x, "residual": r.residual }))?;
            } else {
                ctx.line(format!("lambda = {}", num(r.lambda)))?;
                ctx.line(format!("residual = {}", num(r.residual)))?;
                for i in 0..a.n() {
                    let row: Vec<String> = (0..a.n()).map(|j| cnum(r.x[(i, j)])).collect();
                    ctx.line(format!("  [{}]", row.join(", ")))?;
                }
            }
            Ok(EXIT_OK)
        }
        Command::Complete(c) => complete(ctx, c),
    }
}

fn sidecar_path(p: &Path) -> PathBuf {
    p.with_extension("meta.json")
}

fn gen(ctx: &mut Ctx, g: GenCmd) -> Result<i32, CliError> {
    let (tensor, meta, out) = match g {
        GenCmd::Bec { n, alpha, tensor, out } => {
            let s = bec_build(n, alpha)?;
            let (t, part) = match tensor {
                BecPart::A => (s.a, "A"),
                BecPart::F => (s.f, "F"),
            };
            (t, json!({ "generator": "bec", "params": { "n": n, "alpha": alpha, "tensor": part } }), out)
        }
        GenCmd::Cauchy { c, out } => {
            (cauchy_build(&c)?, json!({ "generator": "cauchy", "params": { "c": c } }), out)
        }
        GenCmd::Qep { n, tau, mu, out } => {
            let sys = mass_spring(n, tau, mu)?;
            let t = qep_tensor(&sys)?;
            let r = overdamping_bound(&t, Some(&sys))?;
            let meta = json!({
                "generator": "qep",
                "params": { "n": n, "tau": tau, "mu": mu },
                "overdamping": {
                    "lambdas": r.lambdas,
                    "certified_bound": r.certified_bound,
                    "naive_bound": r.naive_bound,
                    "overdamped": r.overdamped,
                },
            });
            (t, meta, out)
        }
        GenCmd::Basis { n, indices, re, im, out } => {
            let q = [indices[0], indices[1], indices[2], indices[3]];
            let t = CpsTensor::basis(n, q, C64::new(re, im))?;
            (t, json!({ "generator": "basis", "params": { "n": n, "indices": q, "re": re, "im": im } }), out)
        }
        GenCmd::Random { n, matrix_rank, seed, complex, out } => {
            if n == 0 {
                return Err(cpskit_core::Error::InvalidArgument("dimension must be positive").into());
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let t = match matrix_rank {
                Some(r) => {
                    let lambdas: Vec<f64> = (0..r)
                        .map(|_| {
                            let mag: f64 = rng.random_range(0.5..2.0);
                            if rng.random::<bool>() { mag } else { -mag }
                        })
                        .collect();
                    random_low_rank(&mut rng, n, &lambdas, complex)?
                }
                None => random_cps(&mut rng, n, complex),
            };
            let meta = json!({
                "generator": "random",
                "params": { "n": n, "matrix_rank": matrix_rank, "seed": seed, "complex": complex },
            });
            (t, meta, out)
        }
    };
    let file = TensorFile::from_tensor(&tensor);
    match out.output {
        Some(path) => {
            write_json(&path, &file)?;
            write_json(&sidecar_path(&path), &meta)?;
            if ctx.json {
                ctx.emit_json(&meta)?;
            } else {
                ctx.line(format!(
                    "wrote {} (n = {}, {} canonical entries, {})",
                    path.display(),
                    tensor.n(),
                    file.entries.len(),
                    if tensor.is_real() { "real" } else { "complex" }
                ))?;
                if let Some(od) = meta.get("overdamping") {
                    ctx.line(format!("certified bound = {}", num(od["certified_bound"].as_f64().unwrap_or(f64::NAN))))?;
                    ctx.line(format!("naive bound = {}", num(od["naive_bound"].as_f64().unwrap_or(f64::NAN))))?;
                }
            }
        }
        None => ctx.emit_json(&file)?,
    }
    Ok(EXIT_OK)
}

fn decompose(ctx: &mut Ctx, d: DecomposeCmd) -> Result<i32, CliError> {
    let (kind, args) = match &d {
        DecomposeCmd::Matrix(a) => ("matrix", a),
        DecomposeCmd::Pairs(a) => ("pairs", a),
        DecomposeCmd::Cps(a) => ("cps", a),
        DecomposeCmd::Real(a) => ("real", a),
        DecomposeCmd::RealGrouped(a) => ("real-grouped", a),
    };
    let a = args.input.load()?;
    let tol = args.input.tol;
    let file: DecompositionFile = match kind {
        "matrix" => (&matrix_decomposition(&a, tol)?).into(),
        "pairs" => (&extended_pairs(&a, tol)?).into(),
        "cps" => (&cps_decompose(&a, tol)?).into(),
        "real" => (&real_partial_symmetric(&a, tol)?).into(),
        _ => (&real_cps_grouped(&a, tol)?).into(),
    };
    if let Some(p) = &args.out.output {
        write_json(p, &file)?;
    }
    if ctx.json {
        ctx.emit_json(&file)?;
        return Ok(EXIT_OK);
    }
    ctx.line(format!("{kind} decomposition: {} terms", file.term_count()))?;
    let vec_str = |v: &[[f64; 2]]| v.iter().map(|z| cnum(C64::new(z[0], z[1]))).collect::<Vec<_>>().join(", ");
    let rvec_str = |v: &[f64]| v.iter().map(|&x| num(x)).collect::<Vec<_>>().join(", ");
    match &file {
        DecompositionFile::Matrix { terms, .. } => {
            for (i, t) in terms.iter().enumerate() {
                ctx.line(format!("  lambda[{}] = {}", i + 1, num(t.lambda)))?;
            }
        }
        DecompositionFile::Pairs { terms, .. } => {
            for t in terms {
                ctx.line(format!("  alpha = {}  p = [{}]  q = [{}]", num(t.alpha), vec_str(&t.p), vec_str(&t.q)))?;
            }
        }
        DecompositionFile::Cps { terms, .. } => {
            for t in terms {
                ctx.line(format!("  lambda = {}  a = [{}]", num(t.lambda), vec_str(&t.a)))?;
            }
        }
        DecompositionFile::RealAb { terms, .. } => {
            for t in terms {
                ctx.line(format!("  lambda = {}  a = [{}]  b = [{}]", num(t.lambda), rvec_str(&t.a), rvec_str(&t.b)))?;
            }
        }
        DecompositionFile::RealGrouped { terms, .. } => {
            for t in terms {
                let s = match t {
                    crate::format::GroupedTermJson::ConjPair { lambda, a } => {
                        format!("  conjugate pair  lambda = {}  a = [{}]", num(*lambda), vec_str(a))
                    }
                    crate::format::GroupedTermJson::RealQuartic { lambda, b } => {
                        format!("  real quartic    lambda = {}  b = [{}]", num(*lambda), rvec_str(b))
                    }
                };
                ctx.line(s)?;
            }
        }
    }
    Ok(EXIT_OK)
}

fn rank(ctx: &mut Ctx, r: RankCmd) -> Result<i32, CliError> {
    match r {
        RankCmd::Matrix(input) => {
            let r = matrix_rank(&input.load()?, input.tol)?;
            if ctx.json {
                ctx.emit_json(&json!({ "matrix_rank": r }))?;
            } else {
                ctx.line(format!("matrix rank = {r}"))?;
            }
        }
        RankCmd::Bounds(input) => {
            let b = cp_rank_bounds(&input.load()?, input.tol)?;
            let v = json!({
                "matrix_rank": b.matrix_rank,
                "cp_lower": b.cp_lower,
                "cp_upper": b.cp_upper,
                "unitary_decomposable": b.unitary_decomposable,
                "r_max": b.r_max,
                "reshuffled_rank": b.reshuffled_rank,
                "shared_eigenbasis": b.shared_eigenbasis,
            });
            if ctx.json {
                ctx.emit_json(&v)?;
            } else {
                ctx.line(format!("matrix rank = {}", b.matrix_rank))?;
                ctx.line(format!("cp rank in [{}, {}]", b.cp_lower, b.cp_upper))?;
            }
        }
        RankCmd::Kruskal { file, symmetrize, tol } => {
            let value: serde_json::Value = read_json(&file)?;
            let dec = if value.get("type").is_some() {
                let d: DecompositionFile = serde_json::from_value(value)
                    .map_err(|e| CliError::Json(file.display().to_string(), e))?;
                d.as_cps().ok_or_else(|| CliError::Format("kruskal needs a cps decomposition".into()))?
            } else {
                let t: TensorFile = serde_json::from_value(value)
                    .map_err(|e| CliError::Json(file.display().to_string(), e))?;
                let mode = if symmetrize { SymmetryMode::Symmetrize } else { SymmetryMode::Validate };
                cps_decompose(&t.to_tensor(mode)?, tol)?
            };
            let c = certify_cps_rank(&dec)?;
            if ctx.json {
                ctx.emit_json(&json!({
                    "terms": c.terms,
                    "k_u": c.k_u,
                    "certified": c.certified,
                    "trivial_rank_one": c.trivial_rank_one,
                }))?;
            } else {
                ctx.line(format!("terms = {}, kruskal rank = {}", c.terms, c.k_u))?;
                let verdict = if c.certified {
                    format!("certified: cps rank = {}, decomposition unique", c.terms)
                } else if c.trivial_rank_one {
                    "rank one".to_string()
                } else {
                    "not certified".to_string()
                };
                ctx.line(verdict)?;
            }
        }
    }
    Ok(EXIT_OK)
}

fn verdict_lines(ctx: &mut Ctx, label: &str, v: &PsdVerdict) -> Result<(), CliError> {
    let mut s = format!("{label:<18} {:<13} min = {}", status_name(v.status), num(v.min_found));
    if v.implied {
        s.push_str("  (implied)");
    }
    if v.boundary {
        s.push_str("  (boundary)");
    }
    ctx.line(s)
}

fn psd(ctx: &mut Ctx, p: PsdCmd) -> Result<i32, CliError> {
    let (verdicts, expect): (Vec<PsdVerdict>, bool) = match p {
        PsdCmd::Vector { input, field, search } => {
            let v = vector_psd(&input.load()?, field.into(), &search.options(input.tol))?;
            single(ctx, "vector", &v)?;
            (vec![v], search.expect_psd)
        }
        PsdCmd::Matrix { input, expect_psd } => {
            let v = matrix_psd(&input.load()?, input.tol)?;
            single(ctx, "matrix", &v)?;
            (vec![v], expect_psd)
        }
        PsdCmd::General { input, field, search } => {
            let v = general_psd(&input.load()?, field.into(), &search.options(input.tol))?;
            single(ctx, "general", &v)?;
            (vec![v], search.expect_psd)
        }
        PsdCmd::Hierarchy { input, search, out } => {
            let r = cone_report(&input.load()?, &search.options(input.tol))?;
            let rj = ReportJson::from(&r);
            if let Some(path) = &out.output {
                write_json(path, &rj)?;
            }
            if ctx.json {
                ctx.emit_json(&rj)?;
            } else {
                let rows = [
                    ("vector (real)", r.vector_real.as_ref()),
                    ("vector (complex)", Some(&r.vector_complex)),
                    ("matrix (real)", r.matrix_real.as_ref()),
                    ("matrix (complex)", Some(&r.matrix_complex)),
                    ("general (real)", r.general_real.as_ref()),
                    ("general (complex)", Some(&r.general_complex)),
                ];
                for (label, v) in rows {
                    match v {
                        Some(v) => verdict_lines(ctx, label, v)?,
                        None => ctx.line(format!("{label:<18} n/a (complex tensor)"))?,
                    }
                }
                ctx.line(format!("consistency: {}", r.consistency))?;
            }
            let mut all = vec![r.vector_complex, r.matrix_complex, r.general_complex];
            all.extend(r.vector_real);
            (all, search.expect_psd)
        }
    };
    if expect && verdicts.iter().any(|v| v.status == PsdStatus::NotPsd) {
        return Ok(EXIT_NOT_PSD);
    }
    Ok(EXIT_OK)
}

fn single(ctx: &mut Ctx, label: &str, v: &PsdVerdict) -> Result<(), CliError> {
    if ctx.json {
        return ctx.emit_json(&VerdictJson::from(v));
    }
    verdict_lines(ctx, label, v)?;
    if let Some(w) = &v.witness {
        match w {
            cpskit_core::psd::Witness::Vector(x) => {
                let s: Vec<String> = x.iter().map(|&z| cnum(z)).collect();
                ctx.line(format!("witness x = [{}]", s.join(", ")))?;
            }
            cpskit_core::psd::Witness::Matrix(x) => {
                ctx.line("witness X =")?;
                for i in 0..x.rows() {
                    let row: Vec<String> = (0..x.cols()).map(|j| cnum(x[(i, j)])).collect();
                    ctx.line(format!("  [{}]", row.join(", ")))?;
                }
            }
        }
    }
    Ok(())
}

fn complete(ctx: &mut Ctx, c: CompleteArgs) -> Result<i32, CliError> {
    let mode = if c.symmetrize { SymmetryMode::Symmetrize } else { SymmetryMode::Validate };
    let observed = read_tensor(&c.file, mode)?;
    let mask = match (&c.mask, c.fraction) {
        (Some(p), _) => {
            let m: MaskFile = read_json(p)?;
            m.to_mask()?
        }
        (None, Some(f)) => sample_mask(observed.n(), f, c.seed)?,
        (None, None) => return Err(CliError::Format("either --mask or --fraction is required".into())),
    };
    if let Some(p) = &c.mask_out {
        write_json(p, &MaskFile::from_mask(&mask))?;
    }
    let params = FpcParams {
        mu_start: c.mu_start,
        mu_final: c.mu_final,
        mu_decay: c.mu_decay,
        step: c.step,
        max_iter: c.max_iter,
        rel_tol: c.rel_tol,
    };
    let r = fpc_complete(&mask, &observed, &params)?;
    if let Some(p) = &c.out.output {
        write_json(p, &TensorFile::from_tensor(&r.tensor))?;
    }
    let diag = json!({
        "iterations": r.iterations,
        "final_rank": r.final_rank,
        "fit_residual": r.fit_residual,
        "converged": r.converged,
        "observed_positions": mask.count(),
    });
    if ctx.json {
        ctx.emit_json(&diag)?;
    } else {
        ctx.line(format!(
            "iterations = {}, final rank = {}, fit residual = {}, converged = {}",
            r.iterations,
            r.final_rank,
            num(r.fit_residual),
            r.converged
        ))?;
    }
    Ok(EXIT_OK)
}
