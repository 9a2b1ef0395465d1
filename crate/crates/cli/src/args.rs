use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use grauert_core::holo::Complex64 as C64;

use crate::input;

pub const DEFAULT_SEED: u64 = 1;

/// Comma-separated complex coordinates, e.g. `1+2i,-0.5`.
#[derive(Clone, Debug, PartialEq)]
pub struct Point(pub Vec<C64>);

fn parse_point(s: &str) -> Result<Point, String> {
    input::parse_point(s).map(Point)
}

#[derive(Debug, Parser)]
#[command(
    name = "grauert",
    version,
    about = "Grauert metrics on divisor complements and their curvatures"
)]
pub struct Cli {
    /// Write the artifact here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Table of u, u', u'' on log-spaced t.
    UTable(UTableArgs),
    /// Grauert curvature on a polar grid.
    KgGrid(KgGridArgs),
    #[command(subcommand)]
    Metric(MetricCmd),
    #[command(subcommand)]
    Curvature(CurvatureCmd),
    #[command(subcommand)]
    Leaf(LeafCmd),
    #[command(subcommand)]
    Converge(ConvergeCmd),
    /// Run a bundled verification suite.
    Verify(VerifyArgs),
    /// Run one command described by a JSON config file.
    Run(RunArgs),
}

#[derive(Debug, Args)]
pub struct UTableArgs {
    #[arg(long, default_value_t = 1e-6)]
    pub t_min: f64,
    #[arg(long, default_value_t = 1e6)]
    pub t_max: f64,
    #[arg(long, default_value_t = 121)]
    pub points: usize,
}

#[derive(Debug, Args)]
pub struct KgGridArgs {
    #[arg(long, default_value_t = 1e-6)]
    pub rmin: f64,
    #[arg(long, default_value_t = 1e6)]
    pub rmax: f64,
    /// Log-spaced radii between rmin and rmax.
    #[arg(long, default_value_t = 61)]
    pub radii: usize,
    #[arg(long, default_value_t = 8)]
    pub angles: usize,
}

#[derive(Debug, Subcommand)]
pub enum MetricCmd {
    /// Metric value, matrix and determinant at one point.
    Eval(MetricEvalArgs),
}

#[derive(Debug, Args)]
pub struct MetricEvalArgs {
    /// Defining function (JSON).
    #[arg(long)]
    pub f: PathBuf,
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    pub z: Point,
    #[arg(long = "V", value_parser = parse_point, allow_hyphen_values = true)]
    pub v: Point,
}

#[derive(Debug, Subcommand)]
pub enum CurvatureCmd {
    /// Holomorphic sectional curvature K(p, V).
    Hsc(HscArgs),
    /// Sampled lower bound for sup_V K(p, V).
    Kplus(KplusArgs),
    /// Curvature on a grid: plain curvature for n = 1, K+ otherwise.
    Grid(CurvatureGridArgs),
}

#[derive(Debug, Args)]
pub struct HscArgs {
    #[arg(long)]
    pub f: PathBuf,
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    pub p: Point,
    #[arg(long = "V", value_parser = parse_point, allow_hyphen_values = true)]
    pub v: Point,
}

#[derive(Debug, Args)]
pub struct KplusArgs {
    #[arg(long)]
    pub f: PathBuf,
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    pub p: Point,
    #[arg(long, default_value_t = 256)]
    pub samples: usize,
}

#[derive(Debug, Args)]
pub struct CurvatureGridArgs {
    #[arg(long)]
    pub f: PathBuf,
    /// Compact grid (JSON).
    #[arg(long)]
    pub grid: PathBuf,
    #[arg(long, default_value_t = 64)]
    pub samples: usize,
}

#[derive(Debug, Subcommand)]
pub enum LeafCmd {
    /// Curvature of the metric restricted to the leaf of X through p.
    Curvature(LeafCurvatureArgs),
    /// Curvature along a path converging to a divisor point.
    Approach(LeafApproachArgs),
}

#[derive(Debug, Args)]
pub struct LeafCurvatureArgs {
    #[arg(long)]
    pub f: PathBuf,
    /// Vector field (JSON).
    #[arg(long = "X")]
    pub x: PathBuf,
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    pub p: Point,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PathKind {
    Geometric,
}

#[derive(Debug, Args)]
pub struct LeafApproachArgs {
    #[arg(long)]
    pub f: PathBuf,
    #[arg(long, value_enum, default_value_t = PathKind::Geometric)]
    pub path: PathKind,
    /// Divisor point approached by the path.
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    pub base: Point,
    /// Approach direction; the first unit vector by default.
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    pub direction: Option<Point>,
    #[arg(long, default_value_t = 0.1)]
    pub ratio: f64,
    #[arg(long, default_value_t = 2)]
    pub first: i32,
    #[arg(long, default_value_t = 9)]
    pub steps: usize,
}

#[derive(Debug, Subcommand)]
pub enum ConvergeCmd {
    /// Sup over the grid of the metric gap, for each j in J.
    Metric(ConvergeArgs),
    /// Sup over the grid of the leaf curvature gap, for each j in J.
    Curvature(ConvergeCurvatureArgs),
    /// Compare K_0(p, V) with the tail of K_j(p, V).
    Liminf(LiminfArgs),
}

#[derive(Debug, Args)]
pub struct ConvergeArgs {
    /// Divisor family (JSON).
    #[arg(long)]
    pub family: PathBuf,
    #[arg(long)]
    pub grid: PathBuf,
}

#[derive(Debug, Args)]
pub struct ConvergeCurvatureArgs {
    #[command(flatten)]
    pub common: ConvergeArgs,
    /// Vector field (JSON); the first unit vector by default.
    #[arg(long = "X")]
    pub x: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LiminfArgs {
    #[arg(long)]
    pub family: PathBuf,
    /// Grid from which p is drawn when --p is absent.
    #[arg(long)]
    pub grid: Option<PathBuf>,
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    pub p: Option<Point>,
    #[arg(long = "V", value_parser = parse_point, allow_hyphen_values = true)]
    pub v: Option<Point>,
    /// Smallest index of the tail; the upper half of J by default.
    #[arg(long)]
    pub tail: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Thm11,
    Thm12,
    Thm13,
    Thm51,
    Lemma52,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub suite: Suite,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
}
