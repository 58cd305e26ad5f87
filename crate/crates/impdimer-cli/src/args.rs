//! Command-line grammar and parsers for shapes, terminals, sites and impurities.
//!
//! Sites are written `x,y` with `x` the column from the left and `y` the row from
//! the top, so `N` points away from row 1 and `S` away from the last row. Chains
//! take a single index. A dual corner is appended as `@i,j` with `0 ≤ i ≤ width`
//! and `0 ≤ j ≤ height`.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use impdimer::lattice::{Direction, DualPos, Shape, Site, TerminalSite};

use crate::CliError;

/// Exact impurity-dimer counts, samplers and asymptotics.
#[derive(Debug, Parser)]
#[command(name = "impdimer", version, about)]
pub struct Cli {
    /// Subcommand to run.
    #[command(subcommand)]
    pub command: Command,
    /// Write the report to this file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Output format.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Print timing and progress diagnostics on stderr.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

/// Report formats.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    /// Human-readable text.
    Text,
    /// Versioned JSON document.
    Json,
    /// Comma-separated table with exact numerator and denominator columns.
    Csv,
    /// Graphviz graph, for `export` only.
    Dot,
}

/// Subcommands.
#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact matching count for fixed impurity positions.
    Count(CountArgs),
    /// Exact one-impurity distribution.
    Dist(GridArgs),
    /// Monte Carlo estimates from seeded samplers.
    Sample(SampleArgs),
    /// Asymptotic sweeps from spectral sums and exact weights.
    Asym(AsymArgs),
    /// Runs the acceptance suite.
    Verify(VerifyArgs),
    /// Writes a graph family as DOT or JSON.
    Export(ExportArgs),
}

/// Grid selection shared by several subcommands.
#[derive(Clone, Debug, Args)]
pub struct GridArgs {
    /// `rect:WxH` or `chain:N`.
    #[arg(long, value_parser = parse_shape)]
    pub shape: Shape,
    /// Number of impurities; defaults to the number of impurity flags, or 1.
    #[arg(long)]
    pub k: Option<usize>,
    /// Terminal as `x,y:D` or `i:D` on chains; repeat for `2k − 1` terminals.
    #[arg(long = "terminal")]
    pub terminals: Vec<String>,
}

/// Formula families for `count`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RouteArg {
    /// Green-function determinants.
    Cofactor,
    /// Hitting-probability determinant.
    Hitting,
    /// Grove partition functions.
    Grove,
}

/// Flags of `count`.
#[derive(Clone, Debug, Args)]
pub struct CountArgs {
    /// Grid and terminals.
    #[command(flatten)]
    pub grid: GridArgs,
    /// Impurity site for `k = 1`.
    #[arg(long)]
    pub at: Option<String>,
    /// First impurity for `k = 2`, as `x,y` or `x,y@i,j`.
    #[arg(long)]
    pub a: Option<String>,
    /// Second impurity for `k = 2`.
    #[arg(long)]
    pub b: Option<String>,
    /// Impurity for any `k`; repeat in order.
    #[arg(long = "imp")]
    pub imps: Vec<String>,
    /// Formula route.
    #[arg(long, value_enum, default_value = "cofactor")]
    pub route: RouteArg,
}

/// Sampler kinds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SampleKind {
    /// Uniform spanning trees: uniformity test and terminal-component size.
    Ust,
    /// Simple random walk absorption frequencies.
    Srw,
    /// Terminal-component size and per-site membership.
    Ti,
}

/// Flags of `sample`.
#[derive(Clone, Debug, Args)]
pub struct SampleArgs {
    /// Sampler.
    #[arg(value_enum)]
    pub kind: SampleKind,
    /// Grid and terminals.
    #[command(flatten)]
    pub grid: GridArgs,
    /// Number of samples or walks.
    #[arg(long)]
    pub n: usize,
    /// Stream seed.
    #[arg(long)]
    pub seed: u64,
    /// Start site of the random walks.
    #[arg(long)]
    pub from: Option<String>,
}

/// Asymptotic sweep kinds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum AsymKind {
    /// Exact chain weights and their geometric decay.
    Chain,
    /// Expected terminal-component size on square grids.
    Grid,
    /// Continuum Green-function entry.
    Continuum,
    /// Concentration tail masses.
    Tail,
}

/// Lattice family of `asym tail`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum LatticeArg {
    /// `1 × n` chains.
    Chain,
    /// `n × n` grids.
    Grid,
}

/// Tail computation route.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TailMethodArg {
    /// Exact below the grid limit, spectral above.
    Auto,
    /// Exact rational weights.
    Exact,
    /// Spectral sums.
    Spectral,
}

/// Flags of `asym`.
#[derive(Clone, Debug, Args)]
pub struct AsymArgs {
    /// Sweep.
    #[arg(value_enum)]
    pub kind: AsymKind,
    /// System size.
    #[arg(long)]
    pub n: Option<usize>,
    /// Comma-separated system sizes.
    #[arg(long, value_delimiter = ',')]
    pub ns: Vec<usize>,
    /// Continuum column index.
    #[arg(long, default_value_t = 1)]
    pub x: usize,
    /// Continuum row index.
    #[arg(long, default_value_t = 1)]
    pub y: usize,
    /// Initial quadrature cells per axis.
    #[arg(long, default_value_t = 16)]
    pub resolution: usize,
    /// Lattice of the tail sweep.
    #[arg(long, value_enum, default_value = "grid")]
    pub lattice: LatticeArg,
    /// Box fraction of the tail sweep.
    #[arg(long, default_value_t = 0.25)]
    pub c: f64,
    /// Tail route.
    #[arg(long, value_enum, default_value = "auto")]
    pub method: TailMethodArg,
}

/// Acceptance suite sizes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    /// Reduced instances and sample counts.
    Small,
    /// Instances and sample counts of the acceptance criteria.
    Full,
}

/// Flags of `verify`.
#[derive(Clone, Debug, Args)]
pub struct VerifyArgs {
    /// Suite size.
    #[arg(long, value_enum, default_value = "small")]
    pub suite: Suite,
    /// Run only these criteria.
    #[arg(long, value_delimiter = ',')]
    pub only: Vec<u8>,
}

/// Graph families of `export`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GraphArg {
    /// Primal grid.
    G1,
    /// Superposition graph with impurity diagonals.
    Superposition,
    /// Rooted graph with separate terminal vertices.
    Rooted,
    /// Rooted graph with terminals merged into the root.
    Identified,
    /// Primal grid with one vertex per boundary slot.
    Slotted,
}

/// Flags of `export`.
#[derive(Clone, Debug, Args)]
pub struct ExportArgs {
    /// Grid and terminals.
    #[command(flatten)]
    pub grid: GridArgs,
    /// Graph family.
    #[arg(long, value_enum, default_value = "superposition")]
    pub graph: GraphArg,
}

/// Impurity position as given on the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ImpurityArg {
    /// Primal endpoint.
    pub site: Site,
    /// Dual endpoint; the first boundary corner when absent.
    pub dual: Option<DualPos>,
}

/// Parses `rect:WxH` or `chain:N`.
pub fn parse_shape(s: &str) -> Result<Shape, String> {
    let (kind, dims) = s
        .split_once(':')
        .ok_or_else(|| format!("shape '{s}' must be rect:WxH or chain:N"))?;
    let num = |t: &str| {
        t.trim()
            .parse::<usize>()
            .map_err(|_| format!("'{t}' is not a size"))
    };
    match kind {
        "rect" => {
            let (w, h) = dims
                .split_once(['x', 'X'])
                .ok_or_else(|| format!("rectangle '{dims}' must be WxH"))?;
            Ok(Shape::Rect {
                width: num(w)?,
                height: num(h)?,
            })
        }
        "chain" => Ok(Shape::Chain { len: num(dims)? }),
        _ => Err(format!("unknown shape kind '{kind}'")),
    }
}

/// Maps a command-line direction letter to the library frame, where `N` increases `y`.
pub fn to_library_dir(d: Direction) -> Direction {
    match d {
        Direction::N => Direction::S,
        Direction::S => Direction::N,
        other => other,
    }
}

/// Maps a library direction to its command-line letter.
pub fn from_library_dir(d: Direction) -> Direction {
    to_library_dir(d)
}

fn count(t: &str, what: &str) -> Result<usize, CliError> {
    t.trim()
        .parse::<usize>()
        .map_err(|_| CliError::Usage(format!("{what} '{t}' is not a positive index")))
}

/// Parses `x,y` on rectangles or `i` on chains.
pub fn parse_site(shape: Shape, s: &str) -> Result<Site, CliError> {
    match shape {
        Shape::Chain { .. } => Ok(Site::new(count(s, "chain index")?, 1)),
        Shape::Rect { .. } => {
            let (x, y) = s
                .split_once(',')
                .ok_or_else(|| CliError::Usage(format!("site '{s}' must be x,y")))?;
            Ok(Site::new(count(x, "column")?, count(y, "row")?))
        }
    }
}

/// Parses `x,y:D` or `i:D`.
pub fn parse_terminal(shape: Shape, s: &str) -> Result<TerminalSite, CliError> {
    let (site, dir) = s.rsplit_once(':').ok_or_else(|| {
        CliError::Usage(format!(
            "terminal '{s}' must be SITE:D with D one of N, S, E, W"
        ))
    })?;
    let dir = Direction::parse(dir).map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(TerminalSite {
        site: parse_site(shape, site)?,
        dir: to_library_dir(dir),
    })
}

/// Parses `SITE` or `SITE@i,j`.
pub fn parse_impurity(shape: Shape, s: &str) -> Result<ImpurityArg, CliError> {
    let (site, dual) = match s.split_once('@') {
        Some((site, dual)) => (site, Some(dual)),
        None => (s, None),
    };
    let dual = match dual {
        None => None,
        Some(d) => {
            let (i, j) = d
                .split_once(',')
                .ok_or_else(|| CliError::Usage(format!("dual corner '{d}' must be i,j")))?;
            let idx = |t: &str| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|_| CliError::Usage(format!("dual index '{t}' is not a number")))
            };
            Some(DualPos::new(idx(i)?, idx(j)?))
        }
    };
    Ok(ImpurityArg {
        site: parse_site(shape, site)?,
        dual,
    })
}

/// Renders a site in command-line notation.
pub fn site_text(shape: Shape, s: Site) -> String {
    match shape {
        Shape::Chain { .. } => s.x.to_string(),
        Shape::Rect { .. } => format!("{},{}", s.x, s.y),
    }
}

/// Renders a terminal in command-line notation.
pub fn terminal_text(shape: Shape, t: TerminalSite) -> String {
    format!("{}:{}", site_text(shape, t.site), from_library_dir(t.dir))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes_parse() {
        assert_eq!(
            parse_shape("rect:4x5"),
            Ok(Shape::Rect {
                width: 4,
                height: 5
            })
        );
        assert_eq!(parse_shape("chain:40"), Ok(Shape::Chain { len: 40 }));
        assert!(parse_shape("square:3").is_err());
        assert!(parse_shape("rect:4").is_err());
    }

    #[test]
    fn terminals_round_trip() {
        let shape = Shape::Rect {
            width: 2,
            height: 2,
        };
        let t = parse_terminal(shape, "1,1:N").unwrap();
        assert_eq!(
            t,
            TerminalSite {
                site: Site::new(1, 1),
                dir: Direction::S
            }
        );
        assert_eq!(terminal_text(shape, t), "1,1:N");
        let chain = Shape::Chain { len: 3 };
        assert_eq!(
            terminal_text(chain, parse_terminal(chain, "3:e").unwrap()),
            "3:E"
        );
        assert!(parse_terminal(shape, "1,1").is_err());
        assert!(parse_terminal(shape, "1,1:Q").is_err());
    }

    #[test]
    fn impurities_parse() {
        let shape = Shape::Rect {
            width: 3,
            height: 6,
        };
        let a = parse_impurity(shape, "1,5@1,4").unwrap();
        assert_eq!(
            a,
            ImpurityArg {
                site: Site::new(1, 5),
                dual: Some(DualPos::new(1, 4))
            }
        );
        assert_eq!(parse_impurity(shape, "2,1").unwrap().dual, None);
        assert!(parse_impurity(shape, "2,1@3").is_err());
    }
}
