use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

const QUERY_HELP: &str = "\
Query expressions are prefix s-expressions over fact atoms:
  R(1)  R(a,b)  flag        ground atoms (true when the fact is present)
  (and E ...) (or E ...) (not E)
  (exists R)                some R fact is present
  (count-ge K [R])          at least K facts (of relation R)
  (above {R(1),S(2)} {T(3)}) the instance contains one of the listed sets
  (gt X Y) (lt X Y) (eq X Y) comparisons of constants or ?variables
  true  false
Simulation also accepts the shorthands exists_R and not_exists_R.";

#[derive(Parser)]
#[command(name = "freeterm", version, about = "Free termination analysis for semiautomata", after_help = QUERY_HELP)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Clone)]
pub struct Global {
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Subcommand)]
pub enum Command {
    /// Write a generated system as an automaton file.
    Gen(GenArgs),
    /// Report free termination states, category and algebraic properties.
    Analyze(AnalyzeArgs),
    /// Minimize or collapse an automaton, preserving query behaviour.
    Minimize(MinimizeArgs),
    /// Check one proposition; exit 0 when it holds or does not apply.
    Check(CheckArgs),
    /// Simulate coordination-free evaluation on a network.
    Simulate(SimulateArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GenKind {
    Fig1,
    PowersetUnion,
    GrowOnlySet,
    TwoPhaseSet,
    GCounter,
    PnCounter,
    TcFixpoint,
    ModularCounter,
    ModularAddition,
    StringCount,
    RandomAcyclic,
    RandomStronglyConnected,
    /// Read a JSON generator spec from --spec.
    Spec,
}

#[derive(Args)]
pub struct GenArgs {
    pub kind: GenKind,
    #[arg(long)]
    pub out: PathBuf,
    /// fig1: a, b, c or d.
    #[arg(long)]
    pub variant: Option<String>,
    /// Comma-separated facts, e.g. `a,b,c` or `R(1),R(2)`.
    #[arg(long)]
    pub universe: Option<String>,
    /// Query expression for set systems.
    #[arg(long)]
    pub query: Option<String>,
    #[arg(long)]
    pub replicas: Option<usize>,
    #[arg(long)]
    pub cap: Option<u32>,
    /// Counter query: `sum` or `sum>=K`.
    #[arg(long)]
    pub counter_query: Option<String>,
    /// Drop merge labels from grow-only sets and counters.
    #[arg(long)]
    pub no_merge_labels: bool,
    /// Graph edges for the fixpoint model, e.g. `1-2,2-3`.
    #[arg(long)]
    pub edges: Option<String>,
    /// Fixpoint query `path:S,T` or `cycle`.
    #[arg(long)]
    pub tc_query: Option<String>,
    /// Modulus or cap for the cyclic models.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub states: Option<usize>,
    #[arg(long)]
    pub labels: Option<usize>,
    #[arg(long)]
    pub values: Option<usize>,
    /// JSON generator spec (for `spec`).
    #[arg(long)]
    pub spec: Option<PathBuf>,
}

#[derive(Args)]
pub struct AnalyzeArgs {
    pub input: PathBuf,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write a DOT graph with free states filled.
    #[arg(long)]
    pub dot: Option<PathBuf>,
}

#[derive(Args)]
pub struct MinimizeArgs {
    /// Input file (positional or --in).
    #[arg(conflicts_with = "input_flag", required_unless_present = "input_flag")]
    pub input: Option<PathBuf>,
    #[arg(long = "in", value_name = "FILE")]
    pub input_flag: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// Only collapse free regions, keep all other states.
    #[arg(long)]
    pub collapse_only: bool,
    #[arg(long)]
    pub dot: Option<PathBuf>,
}

impl MinimizeArgs {
    pub fn input(&self) -> &PathBuf {
        self.input
            .as_ref()
            .or(self.input_flag.as_ref())
            .expect("clap requires one")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Prop {
    /// Free termination states agree with the brute-force oracle.
    OracleAgreement,
    /// Inflationary under the natural order: maximal states are free.
    MaximalStatesFt,
    /// Monotone or antitone query: extreme values are free.
    TopInRangeFt,
    /// Threshold query of the minimal true states: predicted free set.
    ThresholdFt,
    /// Acyclic: the minimal free states form a governing antichain.
    Antichain,
    /// Join-semilattice order: all free states share one value.
    SemilatticeFtSameValue,
    /// Join-semilattice order: every state reaches a free state.
    SemilatticeFtsReachable,
    /// Fully invertible: no free states for a non-constant query.
    InverseCurse,
    /// Commutative query: all free states share one value.
    CommutativitySameValue,
    /// Commutative update: every state reaches a free state.
    CommutativityFtsReachable,
    /// No free state lies on a cycle (for minimal machines).
    MinimalFtAcyclic,
    /// Free states are exactly the states with only self-loops.
    CollapsedFixpoint,
}

#[derive(Args)]
pub struct CheckArgs {
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub prop: Prop,
}

#[derive(Args)]
pub struct SimulateArgs {
    /// JSON `{"nodes": N, "edges": [[u,v],...]}`.
    #[arg(long)]
    pub network: PathBuf,
    /// JSON list of facts `{"rel": "R", "tuple": [..]}`.
    #[arg(long)]
    pub instance: PathBuf,
    /// Query expression or shorthand such as `exists_R`.
    #[arg(long)]
    pub query: String,
    /// Number of seeded runs, starting at --seed.
    #[arg(long, default_value_t = 1)]
    pub seeds: u64,
    /// JSON list of facts that may ever appear. Defaults to the instance
    /// plus the ground atoms of the query.
    #[arg(long)]
    pub universe: Option<PathBuf>,
    /// Output variable; makes the query set-valued over --outputs.
    #[arg(long, requires = "outputs")]
    pub var: Option<String>,
    /// Comma-separated candidate outputs for a set-valued query.
    #[arg(long, requires = "var")]
    pub outputs: Option<String>,
    /// Let a coordinator announce the whole input after quiescence.
    #[arg(long, conflicts_with = "policy")]
    pub all_metadata: bool,
    /// Distribution policy file; nodes learn negative facts from it.
    #[arg(long)]
    pub policy: Option<PathBuf>,
    /// Random steps before the drain phase.
    #[arg(long, default_value_t = 500)]
    pub random_steps: usize,
    /// Run seeds on a thread pool.
    #[arg(long)]
    pub parallel_seeds: bool,
    /// Write the full event traces here.
    #[arg(long)]
    pub traces: Option<PathBuf>,
}
