use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use super::model::Model;
use super::report::{set_text, Mode, Report, Val};
use crate::arith::{ExactNorm, Exponent, Q};
use crate::error::Error;
use crate::integrate::{
    check_hoelder, check_minkowski, conv_in_measure_distance, integral, layered_integral, lp_norm, ExactSides,
    InequalityCheck, StepFunction,
};
use crate::kernels::{convolve, disintegrate, fubini, kleisli_lift, path_measure, product_measure, Kernel};
use crate::logic_bisim::{logical_equivalence, mediate_endo, quotient_kernel, validity_set, Formula};
use crate::measures::{
    jordan_decompose, lebesgue_decompose, lp_dual_density, measure_from_functional, radon_nikodym, LinearFunctional,
    Measure, SignedMeasure,
};
use crate::metrics::{check_weak_limit, hutchinson_report, prohorov_report, FiniteMetric};
use crate::spaces::{MeasurableSet, Partition, SpaceRef};

#[derive(Debug, Parser)]
#[command(
    name = "finmeas",
    version,
    about = "Exact measure theory over finite measurable spaces"
)]
pub struct Cli {
    /// Model file (JSON).
    #[arg(short = 'm', long = "model", global = true)]
    pub model: Option<PathBuf>,
    /// Print the report as a JSON object.
    #[arg(long, global = true)]
    pub json: bool,
    /// Print rationals exactly as p/q (default).
    #[arg(long, global = true, conflicts_with = "float")]
    pub exact: bool,
    /// Print rationals as floats with 12 significant digits.
    #[arg(long, global = true)]
    pub float: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Points and atoms of a space.
    Space {
        #[arg(long)]
        space: String,
    },
    #[command(subcommand)]
    /// Evaluate a measure.
    Measure(MeasureCmd),
    #[command(subcommand)]
    /// Jordan or Lebesgue decomposition.
    Decompose(DecomposeCmd),
    /// Radon-Nikodym density dμ/dν per atom.
    Rn {
        #[arg(long)]
        num: String,
        #[arg(long)]
        den: String,
    },
    /// ∫ f dμ, with the layered form for nonnegative f.
    Integrate {
        #[arg(long)]
        function: String,
        #[arg(long)]
        measure: String,
    },
    /// ‖f‖_p with respect to μ.
    LpNorm {
        #[arg(long)]
        function: String,
        #[arg(long)]
        measure: String,
        #[arg(long)]
        p: String,
    },
    #[command(subcommand)]
    /// Check the Hölder or Minkowski inequality.
    Ineq(IneqCmd),
    /// Convergence-in-measure distance between two functions.
    Delta {
        #[arg(long)]
        f: String,
        #[arg(long)]
        g: String,
        #[arg(long)]
        measure: String,
    },
    /// Product measure μ ⊗ ν.
    Product {
        #[arg(long)]
        left: String,
        #[arg(long)]
        right: String,
    },
    /// Direct and iterated integrals of a function on a product.
    Fubini {
        #[arg(long)]
        function: String,
        #[arg(long)]
        left: String,
        #[arg(long)]
        right: String,
    },
    #[command(subcommand)]
    /// Compose, lift, or unroll transition kernels.
    Kernel(KernelCmd),
    /// Marginal and conditional kernel of a measure on a product.
    Disintegrate {
        #[arg(long)]
        joint: String,
    },
    #[command(subcommand)]
    /// Lévy-Prohorov or Hutchinson distance between measures.
    Dist(DistCmd),
    /// Portmanteau diagnostics for a sequence against a limit.
    WeakCheck {
        #[arg(long, value_delimiter = ',', required = true)]
        sequence: Vec<String>,
        #[arg(long)]
        limit: String,
        #[arg(long)]
        metric: String,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    #[command(subcommand)]
    /// Modal formulas and logical-equivalence quotients.
    Logic(LogicCmd),
    #[command(subcommand)]
    /// Bisimulation between two endokernels.
    Bisim(BisimCmd),
    #[command(subcommand)]
    /// Positive linear functionals and their densities.
    Functional(FunctionalCmd),
}

#[derive(Debug, Subcommand)]
pub enum MeasureCmd {
    /// Weights, total, and optionally the value on a set of points.
    Eval {
        #[arg(long)]
        measure: String,
        /// Comma-separated point labels.
        #[arg(long, value_delimiter = ',')]
        set: Option<Vec<String>>,
    },
}

#[derive(Debug, Subcommand)]
pub enum DecomposeCmd {
    /// ν = ν⁺ − ν⁻ for a signed measure.
    Jordan {
        #[arg(long)]
        measure: String,
    },
    /// μ = μ_a + μ_s relative to ν.
    Lebesgue {
        #[arg(long)]
        mu: String,
        #[arg(long)]
        nu: String,
    },
}

#[derive(Debug, Args)]
pub struct IneqArgs {
    #[arg(long)]
    f: String,
    #[arg(long)]
    g: String,
    #[arg(long)]
    measure: String,
    #[arg(long)]
    p: String,
}

#[derive(Debug, Subcommand)]
pub enum IneqCmd {
    /// ∫|fg| dμ ≤ ‖f‖_p ‖g‖_q.
    Hoelder(IneqArgs),
    /// ‖f + g‖_p ≤ ‖f‖_p + ‖g‖_p.
    Minkowski(IneqArgs),
}

#[derive(Debug, Subcommand)]
pub enum KernelCmd {
    /// L * K: apply `first`, then `then`.
    Compose {
        #[arg(long)]
        first: String,
        #[arg(long)]
        then: String,
    },
    /// Kleisli lift of a measure through a kernel.
    Lift {
        #[arg(long)]
        kernel: String,
        #[arg(long)]
        measure: String,
    },
    /// Path measure of a kernel S ⇝ T × S.
    Path {
        #[arg(long)]
        kernel: String,
        #[arg(long)]
        time: String,
        #[arg(long)]
        state: String,
        /// Label of a point in the starting atom.
        #[arg(long)]
        start: String,
        #[arg(long)]
        horizon: usize,
        /// Also report the projection onto the first k steps.
        #[arg(long)]
        truncate: Option<usize>,
    },
}

#[derive(Debug, Subcommand)]
pub enum DistCmd {
    /// Exact Lévy-Prohorov distance.
    Prohorov {
        #[arg(long)]
        left: String,
        #[arg(long)]
        right: String,
        #[arg(long)]
        metric: String,
    },
    /// Hutchinson distance H_γ with an optimal witness.
    Hutchinson {
        #[arg(long)]
        left: String,
        #[arg(long)]
        right: String,
        #[arg(long)]
        metric: String,
        #[arg(long)]
        gamma: String,
    },
}

#[derive(Debug, Subcommand)]
pub enum LogicCmd {
    /// Validity set of a formula.
    Check {
        #[arg(long)]
        kernel: String,
        #[arg(long)]
        formula: String,
    },
    /// Quotient by logical equivalence, or by a given congruence.
    Quotient {
        #[arg(long)]
        kernel: String,
        #[arg(long)]
        partition: Option<String>,
    },
}

#[derive(Debug, Subcommand)]
pub enum BisimCmd {
    /// Mediating kernel between two logically equivalent endokernels.
    Mediate {
        #[arg(long)]
        left: String,
        #[arg(long)]
        right: String,
    },
}

#[derive(Debug, Subcommand)]
pub enum FunctionalCmd {
    /// Measure represented by a positive functional.
    ToMeasure {
        #[arg(long)]
        functional: String,
    },
    /// Density representing a functional on L^p(μ).
    Dual {
        #[arg(long)]
        functional: String,
        #[arg(long)]
        measure: String,
        #[arg(long)]
        p: String,
    },
}

/// Failure of a command, split by exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliError {
    /// Bad input: unknown name, unparsable argument, invalid model (exit 2).
    Input { code: String, message: String },
    /// The library rejected the request (exit 1).
    Domain(Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input { .. } => 2,
            CliError::Domain(_) => 1,
        }
    }

    pub fn code(&self) -> &str {
        match self {
            CliError::Input { code, .. } => code,
            CliError::Domain(e) => e.code(),
        }
    }

    pub fn message(&self) -> String {
        match self {
            CliError::Input { message, .. } => message.clone(),
            CliError::Domain(e) => e.to_string(),
        }
    }

    fn input(message: impl Into<String>) -> Self {
        CliError::Input {
            code: "Input".into(),
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::FormulaParse { .. } | Error::InvalidExponent(_) | Error::InvalidGamma(_) => CliError::Input {
                code: e.code().to_string(),
                message: e.to_string(),
            },
            e => CliError::Domain(e),
        }
    }
}

type CmdResult = std::result::Result<Report, CliError>;

fn lookup<'a, T>(map: &'a std::collections::BTreeMap<String, T>, what: &str, name: &str) -> Result<&'a T, CliError> {
    map.get(name)
        .ok_or_else(|| CliError::input(format!("no {what} named `{name}` in the model")))
}

fn atom_texts(space: &SpaceRef) -> Val {
    Val::texts((0..space.atom_count()).map(|a| format!("{{{}}}", space.atom_labels(a).join(", "))))
}

fn atom_text(space: &SpaceRef, atom: usize) -> String {
    format!("{{{}}}", space.atom_labels(atom).join(", "))
}

fn parse_q(text: &str, what: &str) -> Result<Q, CliError> {
    crate::arith::parse_rational(text).map_err(|m| CliError::input(format!("{what}: {m}")))
}

fn parse_p(text: &str) -> Result<Exponent, CliError> {
    text.parse::<Exponent>().map_err(CliError::from)
}

fn kernel_rows(report: &mut Report, k: &Kernel) {
    report.push("kind", k.kind().name());
    report.push("domain", atom_texts(k.domain()));
    report.push("codomain", atom_texts(k.codomain()));
    for (a, row) in k.rows().iter().enumerate() {
        report.push(format!("row {}", atom_text(k.domain(), a)), Val::rats(row.weights()));
    }
}

fn inequality(report: &mut Report, c: &InequalityCheck) {
    report.push("lhs", Val::Float(c.lhs));
    report.push("rhs", Val::Float(c.rhs));
    report.push("holds", c.holds);
    match &c.exact {
        Some(ExactSides::Direct { lhs, rhs }) => {
            report.push("decided", "exact");
            report.push("exact_lhs", lhs);
            report.push("exact_rhs", rhs);
        }
        Some(ExactSides::Squared { lhs, rhs }) => {
            report.push("decided", "exact (squared sides)");
            report.push("lhs_squared", lhs);
            report.push("rhs_squared", rhs);
        }
        None => {
            report.push("decided", "float");
        }
    }
    report.push(
        "equality",
        match c.equality {
            Some(b) => b.to_string(),
            None => "undecided".to_string(),
        },
    );
}

struct Ctx<'a> {
    model: &'a Model,
    mode: Mode,
}

impl Ctx<'_> {
    fn measure(&self, name: &str) -> Result<&Measure, CliError> {
        lookup(&self.model.measures, "measure", name)
    }

    fn function(&self, name: &str) -> Result<&StepFunction, CliError> {
        lookup(&self.model.functions, "function", name)
    }

    fn kernel(&self, name: &str) -> Result<&Kernel, CliError> {
        lookup(&self.model.kernels, "kernel", name)
    }

    fn metric(&self, name: &str) -> Result<&FiniteMetric, CliError> {
        lookup(&self.model.metrics, "metric", name)
    }

    fn space(&self, name: &str) -> Result<&SpaceRef, CliError> {
        lookup(&self.model.spaces, "space", name)
    }

    fn functional(&self, name: &str) -> Result<&LinearFunctional, CliError> {
        lookup(&self.model.functionals, "functional", name)
    }

    fn signed(&self, name: &str) -> Result<SignedMeasure, CliError> {
        match self.model.signed.get(name) {
            Some(s) => Ok(s.clone()),
            None => Ok(self.measure(name)?.to_signed()),
        }
    }
}

/// Runs one parsed command against a loaded model.
pub fn execute(model: &Model, command: &Command, mode: Mode) -> CmdResult {
    let ctx = Ctx { model, mode };
    let mut r = Report::new();
    match command {
        Command::Space { space } => {
            let s = ctx.space(space)?;
            r.push("space", space.as_str());
            r.push("points", Val::texts(s.points()));
            r.push("atoms", atom_texts(s));
            r.push("atom_count", s.atom_count());
            r.push("discrete", s.is_discrete());
            r.push("product", s.factors().is_some());
        }
        Command::Measure(MeasureCmd::Eval { measure, set }) => {
            let m = ctx.signed(measure)?;
            r.push("measure", measure.as_str());
            r.push("atoms", atom_texts(m.space()));
            r.push("weights", Val::rats(m.weights()));
            r.push("total", m.weights().iter().sum::<Q>());
            if let Some(labels) = set {
                let s = MeasurableSet::from_labels(m.space(), labels)?;
                r.push("set", &s);
                r.push("value", m.eval(&s)?);
            }
        }
        Command::Decompose(DecomposeCmd::Jordan { measure }) => {
            let m = ctx.signed(measure)?;
            let j = jordan_decompose(&m);
            r.push("atoms", atom_texts(m.space()));
            r.push("positive_set", &j.positive_set);
            r.push("negative_set", &j.negative_set);
            r.push("plus", Val::rats(j.plus.weights()));
            r.push("minus", Val::rats(j.minus.weights()));
            r.push("total_variation", Val::rats(j.total_variation.weights()));
        }
        Command::Decompose(DecomposeCmd::Lebesgue { mu, nu }) => {
            let (m, n) = (ctx.measure(mu)?, ctx.measure(nu)?);
            let l = lebesgue_decompose(m, n)?;
            r.push("atoms", atom_texts(m.space()));
            r.push("continuous", Val::rats(l.continuous.weights()));
            r.push("singular", Val::rats(l.singular.weights()));
            r.push("density", Val::rats(l.density.values()));
        }
        Command::Rn { num, den } => {
            let (m, n) = (ctx.measure(num)?, ctx.measure(den)?);
            let h = radon_nikodym(m, n)?;
            r.push("atoms", atom_texts(m.space()));
            r.push("density", Val::rats(h.values()));
        }
        Command::Integrate { function, measure } => {
            let (f, m) = (ctx.function(function)?, ctx.measure(measure)?);
            r.push("integral", integral(f, m)?);
            if f.is_nonnegative() {
                r.push("layered", layered_integral(f, m)?);
            }
        }
        Command::LpNorm { function, measure, p } => {
            let (f, m, p) = (ctx.function(function)?, ctx.measure(measure)?, parse_p(p)?);
            let n = lp_norm(f, m, &p)?;
            r.push("p", p.to_string());
            match (ctx.mode, &n.exact) {
                (Mode::Exact, Some(ExactNorm::Value(v))) => {
                    r.push("norm", v);
                }
                (Mode::Exact, Some(ExactNorm::Squared(s))) => {
                    r.push("norm", Val::Float(n.approx));
                    r.push("norm_squared", s);
                }
                _ => {
                    r.push("norm", Val::Float(n.approx));
                }
            }
        }
        Command::Ineq(cmd) => {
            let (a, hoelder) = match cmd {
                IneqCmd::Hoelder(a) => (a, true),
                IneqCmd::Minkowski(a) => (a, false),
            };
            let (f, g, m, p) = (
                ctx.function(&a.f)?,
                ctx.function(&a.g)?,
                ctx.measure(&a.measure)?,
                parse_p(&a.p)?,
            );
            let c = if hoelder {
                check_hoelder(f, g, m, &p)?
            } else {
                check_minkowski(f, g, m, &p)?
            };
            r.push("inequality", if hoelder { "hoelder" } else { "minkowski" });
            r.push("p", p.to_string());
            inequality(&mut r, &c);
        }
        Command::Delta { f, g, measure } => {
            let (f, g, m) = (ctx.function(f)?, ctx.function(g)?, ctx.measure(measure)?);
            r.push("distance", conv_in_measure_distance(f, g, m)?);
        }
        Command::Product { left, right } => {
            let w = product_measure(ctx.measure(left)?, ctx.measure(right)?);
            r.push("atoms", atom_texts(w.space()));
            r.push("weights", Val::rats(w.weights()));
            r.push("total", w.total());
        }
        Command::Fubini { function, left, right } => {
            let rep = fubini(ctx.function(function)?, ctx.measure(left)?, ctx.measure(right)?)?;
            r.push("direct", &rep.direct);
            r.push("iterated_xy", &rep.iterated_xy);
            r.push("iterated_yx", &rep.iterated_yx);
            r.push("consistent", rep.consistent());
        }
        Command::Kernel(KernelCmd::Compose { first, then }) => {
            let k = convolve(ctx.kernel(then)?, ctx.kernel(first)?)?;
            kernel_rows(&mut r, &k);
        }
        Command::Kernel(KernelCmd::Lift { kernel, measure }) => {
            let m = kleisli_lift(ctx.kernel(kernel)?, ctx.measure(measure)?)?;
            r.push("atoms", atom_texts(m.space()));
            r.push("weights", Val::rats(m.weights()));
            r.push("total", m.total());
        }
        Command::Kernel(KernelCmd::Path {
            kernel,
            time,
            state,
            start,
            horizon,
            truncate,
        }) => {
            let (k, t, s) = (ctx.kernel(kernel)?, ctx.space(time)?, ctx.space(state)?);
            let start_atom = s.atom_of(s.point_index(start).map_err(|e| CliError::input(e.to_string()))?);
            let pm = path_measure(k, t, s, start_atom, *horizon)?;
            let m = pm.measure();
            r.push("horizon", *horizon);
            r.push("paths", m.space().atom_count());
            let support: Vec<usize> = (0..m.space().atom_count())
                .filter(|&a| !num_traits::Zero::is_zero(m.weight(a)))
                .collect();
            let step = pm.step();
            let path_text = |mut a: usize| {
                let mut steps = vec![String::new(); *horizon];
                for slot in steps.iter_mut().rev() {
                    *slot = step.atom_label(a % step.atom_count()).to_string();
                    a /= step.atom_count();
                }
                format!("({})", steps.join(", "))
            };
            r.push("support", Val::texts(support.iter().map(|&a| path_text(a))));
            r.push("support_weights", Val::rats(support.iter().map(|&a| m.weight(a))));
            if let Some(k) = truncate {
                let tm = pm
                    .truncate(*k)
                    .map_err(|_| CliError::input(format!("--truncate must be in 1..={horizon}")))?;
                r.push("truncated_to", *k);
                r.push("truncated_weights", Val::rats(tm.weights()));
            }
        }
        Command::Disintegrate { joint } => {
            let d = disintegrate(ctx.measure(joint)?)?;
            r.push("marginal", Val::rats(d.marginal.weights()));
            kernel_rows(&mut r, &d.conditional);
            r.push(
                "null_fibers",
                Val::texts(d.null_fibers.iter().map(|&a| atom_text(d.marginal.space(), a))),
            );
        }
        Command::Dist(DistCmd::Prohorov { left, right, metric }) => {
            let rep = prohorov_report(ctx.measure(left)?, ctx.measure(right)?, ctx.metric(metric)?)?;
            r.push("distance", &rep.distance);
            r.push("attained", rep.attained);
            r.push(
                "binding_set",
                rep.binding_set.as_ref().map_or_else(|| "none".to_string(), set_text),
            );
        }
        Command::Dist(DistCmd::Hutchinson {
            left,
            right,
            metric,
            gamma,
        }) => {
            let gamma = parse_q(gamma, "--gamma")?;
            let rep = hutchinson_report(ctx.measure(left)?, ctx.measure(right)?, ctx.metric(metric)?, &gamma)?;
            r.push("distance", &rep.distance);
            r.push("gamma", &rep.witness.gamma);
            r.push("witness", Val::rats(&rep.witness.values));
        }
        Command::WeakCheck {
            sequence,
            limit,
            metric,
            tol,
        } => {
            let seq = sequence
                .iter()
                .map(|n| ctx.measure(n).cloned())
                .collect::<Result<Vec<_>, _>>()?;
            let rep = check_weak_limit(&seq, ctx.measure(limit)?, ctx.metric(metric)?, *tol)?;
            r.push("tail_start", rep.tail_start);
            r.push("per_atom", rep.per_atom);
            r.push("closed_sets", rep.closed_sets);
            r.push("total_mass", rep.total_mass);
            r.push("criteria_agree", rep.criteria_agree);
            r.push("converges", rep.converges);
            r.push("max_atom_residual", &rep.max_atom_residual);
            r.push(
                "witness",
                rep.witness.as_ref().map_or_else(|| "none".to_string(), set_text),
            );
        }
        Command::Logic(LogicCmd::Check { kernel, formula }) => {
            let k = ctx.kernel(kernel)?;
            let phi = Formula::parse(formula)?;
            let s = validity_set(k, &phi)?;
            r.push("formula", phi.to_string());
            r.push("validity_set", &s);
        }
        Command::Logic(LogicCmd::Quotient { kernel, partition }) => {
            let k = ctx.kernel(kernel)?;
            let p: Partition = match partition {
                Some(name) => lookup(&ctx.model.partitions, "partition", name)?.clone(),
                None => logical_equivalence(k)?,
            };
            let blocks: Vec<String> = p
                .block_labels()
                .iter()
                .map(|b| format!("{{{}}}", b.join(", ")))
                .collect();
            r.push("partition", Val::texts(blocks));
            let qk = quotient_kernel(k, &p)?;
            kernel_rows(&mut r, &qk);
        }
        Command::Bisim(BisimCmd::Mediate { left, right }) => {
            let (k1, k2) = (ctx.kernel(left)?, ctx.kernel(right)?);
            let med = mediate_endo(k1, k2)?;
            let pair = |s1: &SpaceRef, s2: &SpaceRef, &(i, j): &(usize, usize)| {
                format!("({}, {})", s1.atom_label(i), s2.atom_label(j))
            };
            r.push(
                "source_pairs",
                Val::texts(med.source_pairs.iter().map(|p| pair(k1.domain(), k2.domain(), p))),
            );
            r.push(
                "target_pairs",
                Val::texts(med.target_pairs.iter().map(|p| pair(k1.codomain(), k2.codomain(), p))),
            );
            r.push("kind", med.kernel.kind().name());
            for (a, row) in med.kernel.rows().iter().enumerate() {
                r.push(
                    format!("row {}", pair(k1.domain(), k2.domain(), &med.source_pairs[a])),
                    Val::rats(row.weights()),
                );
            }
            r.push(
                "common_event",
                match &med.common_event {
                    Some((u1, u2)) => format!("{} ~ {}", set_text(u1), set_text(u2)),
                    None => "trivial".to_string(),
                },
            );
        }
        Command::Functional(FunctionalCmd::ToMeasure { functional }) => {
            let m = measure_from_functional(ctx.functional(functional)?)?;
            r.push("atoms", atom_texts(m.space()));
            r.push("weights", Val::rats(m.weights()));
            r.push("total", m.total());
        }
        Command::Functional(FunctionalCmd::Dual { functional, measure, p }) => {
            let p = parse_p(p)?;
            let d = lp_dual_density(ctx.functional(functional)?, ctx.measure(measure)?, &p)?;
            r.push("p", p.to_string());
            r.push("conjugate", d.conjugate.to_string());
            r.push("density", Val::rats(d.density.values()));
            match (ctx.mode, &d.operator_norm.exact) {
                (Mode::Exact, Some(ExactNorm::Value(v))) => {
                    r.push("operator_norm", v);
                }
                (Mode::Exact, Some(ExactNorm::Squared(s))) => {
                    r.push("operator_norm", Val::Float(d.operator_norm.approx));
                    r.push("operator_norm_squared", s);
                }
                _ => {
                    r.push("operator_norm", Val::Float(d.operator_norm.approx));
                }
            }
        }
    }
    Ok(r)
}
