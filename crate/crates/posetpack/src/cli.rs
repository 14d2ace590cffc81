//! Command-line front end.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::absorber::{absorb, build_absorber, product_absorb, AbsorbOptions};
use crate::assembly::{assemble_truncated, select_absorbers, AssemblyParams, Selection};
use crate::chains::equal_chain_partition_budget;
use crate::error::{Error, Outcome, Result};
use crate::grid::{dense_grid_packing, grid_stack_partition_budget, stacked_pair_partition, theorem1_partition, Theorem1Params};
use crate::ground::GroundPoset;
use crate::io;
use crate::oracle::{exact_partition_oracle, verify_masks, verify_packing, Mode};
use crate::packing::{CopySet, Packing};
use crate::poset::{find_realizer, Poset};
use crate::product::BoxLattice;
use crate::residues::{realize_pair, residue_of, strongly_realize, ResidueFunction};
use crate::svg;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_TIMEOUT: i32 = 2;
pub const EXIT_PARAM: i32 = 3;
pub const EXIT_CONSTRUCTION: i32 = 4;
pub const EXIT_IO: i32 = 5;
pub const EXIT_USAGE: i32 = 64;

const CODES: &str = "Exit codes:
  0   success, verifier pass, partition found
  1   verification failed or partition proved infeasible
  2   search budget exhausted
  3   bad parameter or precondition
  4   construction failure (capacity, retries, greedy, bridge, stage)
  5   file or parse error
  64  usage error";

#[derive(Parser, Debug)]
#[command(name = "posetpack", version, about = "Packings of Boolean lattices and grids by copies of a poset", after_help = CODES)]
pub struct Cli {
    /// key=value parameter file (read by `assemble`)
    #[arg(long, global = true)]
    pub params: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Node budget for exhaustive searches
    #[arg(long, global = true)]
    pub budget: Option<u64>,
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Args, Debug)]
pub struct PosetArg {
    /// Poset file: `poset <n>` then `<i> < <j>` lines
    #[arg(long)]
    pub poset: PathBuf,
}

#[derive(Args, Debug)]
pub struct OutArg {
    /// Output file; nothing is written when omitted
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// Minimal realizer of a poset
    Dim {
        #[command(flatten)]
        p: PosetArg,
        #[arg(long, default_value_t = 4)]
        max_d: usize,
    },
    /// Dense packing of a grid
    PackGrid {
        #[command(flatten)]
        p: PosetArg,
        /// Side lengths, e.g. 13,13
        #[arg(long, value_delimiter = ',', required = true)]
        dims: Vec<u32>,
        #[command(flatten)]
        o: OutArg,
    },
    /// Partition of two stacked copies of [h]^d
    Pair {
        #[command(flatten)]
        p: PosetArg,
        #[arg(long)]
        h: u32,
        #[command(flatten)]
        o: OutArg,
    },
    /// Partition of [2h]^m into stacked grids
    GridStack {
        #[arg(long)]
        h: u32,
        #[arg(long)]
        d: u32,
        #[arg(long)]
        m: u32,
        #[command(flatten)]
        o: OutArg,
    },
    /// Partition of 2^[n] into chains of size h
    Chains {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        h: usize,
        #[command(flatten)]
        o: OutArg,
    },
    /// Partition of 2^[sm] through chains, stacked grids and pairs
    Theorem1 {
        #[command(flatten)]
        p: PosetArg,
        #[arg(long)]
        h: u32,
        #[arg(long)]
        s: u32,
        #[arg(long)]
        m: u32,
        #[command(flatten)]
        o: OutArg,
    },
    /// Build and check an absorber
    AbsorberBuild {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        d: u32,
        /// Four comma lists separated by '/', e.g. 1/2/3/4
        #[arg(long)]
        alpha: String,
        #[arg(long, value_delimiter = ',', required = true)]
        f: Vec<u32>,
        #[arg(long, value_delimiter = ',')]
        gamma: Vec<u32>,
        #[command(flatten)]
        o: OutArg,
    },
    /// Pack an absorber minus a removed set, optionally times 2^[s]
    Absorb {
        #[arg(long)]
        absorber: PathBuf,
        #[command(flatten)]
        p: PosetArg,
        /// Removed elements as hex masks
        #[arg(long, value_delimiter = ',')]
        remove: Vec<String>,
        #[arg(long, default_value_t = 0)]
        s: u32,
        #[command(flatten)]
        o: OutArg,
    },
    /// Random collection of absorbers in 2^[n1]
    SelectAbsorbers {
        #[command(flatten)]
        p: PosetArg,
        #[arg(long)]
        n1: u32,
        #[arg(long, default_value_t = 1)]
        d: u32,
        #[arg(long, default_value_t = 0.01)]
        q: f64,
        #[arg(long, default_value_t = 20_000)]
        retries: usize,
        #[command(flatten)]
        o: OutArg,
    },
    /// Realize a residue function by copies avoiding problematic and restricted elements
    Realize {
        #[command(flatten)]
        p: PosetArg,
        /// Residue file of `<element> <value>` lines over B(k)
        #[arg(long, conflicts_with = "pair")]
        residues: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        k: u32,
        #[arg(long, default_value_t = 1)]
        n1: u32,
        #[arg(long, default_value_t = 0)]
        t: u32,
        /// Realize chi_x - chi_y in T(m) instead; hex masks x,y
        #[arg(long, value_delimiter = ',', num_args = 1)]
        pair: Option<Vec<String>>,
        #[arg(long)]
        m: Option<u32>,
        #[arg(long)]
        good: bool,
        #[command(flatten)]
        o: OutArg,
    },
    /// Packing of a truncated product lattice from a parameter file
    Assemble {
        #[command(flatten)]
        o: OutArg,
        /// Plain-text report file
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Check a packing file
    Verify {
        #[arg(long)]
        packing: PathBuf,
        #[command(flatten)]
        p: PosetArg,
        /// packing, partition, or almost:<t>
        #[arg(long, default_value = "partition")]
        mode: String,
    },
    /// Exhaustive partition search
    Oracle {
        /// e.g. boolean:4, grid:3,4, stack:2,1
        #[arg(long)]
        ground: String,
        #[command(flatten)]
        p: PosetArg,
        #[command(flatten)]
        o: OutArg,
    },
    /// Draw a packing of a 2-dimensional grid
    Svg {
        #[arg(long)]
        packing: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

pub fn exit_code(e: &Error) -> i32 {
    match e.root() {
        Error::Timeout(_) => EXIT_TIMEOUT,
        Error::Infeasible(_) | Error::Verify(_) => EXIT_FAIL,
        Error::Io(_) | Error::Parse { .. } => EXIT_IO,
        Error::Capacity { .. }
        | Error::RetriesExhausted(_)
        | Error::GreedyExhausted(_)
        | Error::Bridge(_)
        | Error::Stage { .. } => EXIT_CONSTRUCTION,
        _ => EXIT_PARAM,
    }
}

pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn write(out: &OutArg, text: &str) -> Result<()> {
    if let Some(path) = &out.out {
        fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn load_poset(p: &PosetArg) -> Result<Poset> {
    io::parse_poset(&read(&p.poset)?)
}

fn hex(s: &str) -> Result<u64> {
    u64::from_str_radix(s.trim(), 16).map_err(|_| Error::Parameter(format!("bad hex mask {s:?}")))
}

fn realizer(p: &Poset) -> Result<crate::poset::Realizer> {
    find_realizer(p, p.size().max(1))?.ok_or_else(|| Error::Infeasible("no realizer found".into()))
}

fn summary(p: &Poset, packing: &Packing) -> String {
    let r = verify_packing(&packing.ground, p, packing, Mode::Packing);
    format!("copies={} covered={} uncovered={}", packing.len(), r.covered, r.uncovered_count)
}

fn emit_packing(p: &Poset, packing: &Packing, out: &OutArg) -> Result<i32> {
    write(out, &io::packing_to_text(p, packing))?;
    println!("{}", summary(p, packing));
    Ok(EXIT_OK)
}

fn dispatch(cli: &Cli) -> Result<i32> {
    let budget = cli.budget;
    match &cli.cmd {
        Cmd::Dim { p, max_d } => {
            let poset = load_poset(p)?;
            match find_realizer(&poset, *max_d)? {
                Some(r) => {
                    println!("dim={}", r.d());
                    for o in r.orders() {
                        println!("{}", o.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" "));
                    }
                    Ok(EXIT_OK)
                }
                None => {
                    println!("dim>{max_d}");
                    Ok(EXIT_FAIL)
                }
            }
        }
        Cmd::PackGrid { p, dims, o } => {
            let poset = load_poset(p)?;
            let packing = dense_grid_packing(&poset, &realizer(&poset)?, dims)?;
            emit_packing(&poset, &packing, o)
        }
        Cmd::Pair { p, h, o } => {
            let poset = load_poset(p)?;
            let packing = stacked_pair_partition(&poset, &realizer(&poset)?, *h)?;
            emit_packing(&poset, &packing, o)
        }
        Cmd::GridStack { h, d, m, o } => {
            match grid_stack_partition_budget(*h, *d, *m, budget.unwrap_or(crate::chains::DEFAULT_CHAIN_BUDGET))? {
                Outcome::Found(copies) => {
                    let packing = Packing::with_copies(GroundPoset::Grid(vec![2 * h; *m as usize]), copies);
                    let stack = stack_poset(*h, *d)?;
                    emit_packing(&stack, &packing, o)
                }
                Outcome::Infeasible(why) => {
                    println!("infeasible: {why}");
                    Ok(EXIT_FAIL)
                }
            }
        }
        Cmd::Chains { n, h, o } => {
            match equal_chain_partition_budget(*n, *h, budget.unwrap_or(crate::chains::DEFAULT_CHAIN_BUDGET))? {
                Outcome::Found(c) => {
                    write(o, &io::chains_to_text(&c))?;
                    println!("chains={} size={h}", c.chains.len());
                    Ok(EXIT_OK)
                }
                Outcome::Infeasible(why) => {
                    println!("infeasible: {why}");
                    Ok(EXIT_FAIL)
                }
            }
        }
        Cmd::Theorem1 { p, h, s, m, o } => {
            let poset = load_poset(p)?;
            let params =
                Theorem1Params { h: *h, s: *s, m: *m, budget: budget.unwrap_or(crate::chains::DEFAULT_CHAIN_BUDGET) };
            let packing = theorem1_partition(&poset, &params, None)?;
            emit_packing(&poset, &packing, o)
        }
        Cmd::AbsorberBuild { n, d, alpha, f, gamma, o } => {
            let parts: Vec<Vec<u32>> = alpha
                .split('/')
                .map(|a| a.split(',').map(|t| t.trim().parse().map_err(|_| Error::Parameter(format!("bad alpha {a:?}")))).collect())
                .collect::<Result<_>>()?;
            let (Ok(alpha), Ok(f)) = (<[Vec<u32>; 4]>::try_from(parts), <[u32; 4]>::try_from(f.clone())) else {
                return Err(Error::Parameter("need four alpha sets and four f values".into()));
            };
            let a = build_absorber(*n, *d, alpha, f, gamma.clone())?;
            write(o, &a.to_text())?;
            println!("absorber n={} d={} elements={} law={}", a.n, a.d, a.elements().len(), a.law_holds());
            Ok(EXIT_OK)
        }
        Cmd::Absorb { absorber, p, remove, s, o } => {
            let a = io::parse_absorber(&read(absorber)?)?;
            let poset = load_poset(p)?;
            let r = remove.iter().map(|t| hex(t)).collect::<Result<Vec<_>>>()?;
            let opts = AbsorbOptions { exact_budget: budget.unwrap_or(AbsorbOptions::default().exact_budget) };
            let (copies, n) = if *s == 0 {
                (absorb(&a, &r, &poset, &opts)?.copies, a.n)
            } else {
                let r_map = vec![r.clone(); 1 << s];
                (product_absorb(*s, &a, &r_map, &poset, &opts)?.copies, a.n + s)
            };
            let packing = Packing::with_copies(GroundPoset::boolean(n)?, copies.iter().map(|c| CopySet::from_masks(c)).collect());
            write(o, &io::packing_to_text(&poset, &packing))?;
            let region = a.elements().len() as u64 * (1u64 << s) - (r.len() as u64) * (1u64 << s);
            let covered = copies.len() as u64 * poset.size() as u64;
            println!("copies={} covered={covered} uncovered={}", copies.len(), region - covered);
            Ok(EXIT_OK)
        }
        Cmd::SelectAbsorbers { p, n1, d, q, retries, o } => {
            let poset = load_poset(p)?;
            let coll = select_absorbers(*n1, *d, *q, *retries, cli.seed.unwrap_or(1), &poset)?;
            write(o, &coll.absorbers.iter().map(|a| a.to_text()).collect::<Vec<_>>().join("\n"))?;
            println!(
                "absorbers={} attempts={} disjoint={} no_extreme_sizes={} completes_all={}",
                coll.absorbers.len(),
                coll.attempts,
                coll.disjoint,
                coll.no_extreme_sizes,
                coll.completes_all
            );
            Ok(EXIT_OK)
        }
        Cmd::Realize { p, residues, k, n1, t, pair, m, good, o } => {
            let poset = load_poset(p)?;
            let modulus = poset.size() as u32;
            let (ms, target) = if let Some(xy) = pair {
                let [x, y] = xy.as_slice() else {
                    return Err(Error::Parameter("--pair takes x,y".into()));
                };
                let (x, y) = (hex(x)?, hex(y)?);
                let m = m.ok_or_else(|| Error::Parameter("--pair needs --m".into()))?;
                let mut f = ResidueFunction::zero(modulus);
                f.add(x, 1);
                f.add(y, modulus - 1);
                (realize_pair(x, y, m, &poset, *good)?, f)
            } else {
                let path = residues.as_ref().ok_or_else(|| Error::Parameter("need --residues or --pair".into()))?;
                let f = ResidueFunction::parse(&read(path)?, modulus)?;
                (strongly_realize(&f, &BoxLattice::new(*k, *n1)?, *t, &poset)?, f)
            };
            write(o, &io::multiset_to_text(&ms))?;
            let ok = residue_of(&ms) == target;
            println!("copies={} distinct={} residue={}", ms.count(), ms.len(), if ok { "match" } else { "mismatch" });
            Ok(if ok { EXIT_OK } else { EXIT_FAIL })
        }
        Cmd::Assemble { o, report } => {
            let path = cli.params.as_ref().ok_or_else(|| Error::Parameter("assemble needs --params".into()))?;
            let map = io::parse_params(&read(path)?)?;
            let (poset, params) = assembly_params(&map, path.parent().unwrap_or(Path::new(".")), cli)?;
            let asm = assemble_truncated(&poset, &params)?;
            let packing = Packing::with_copies(
                GroundPoset::truncated(asm.n)?,
                asm.copies.iter().map(|c| CopySet::from_masks(c)).collect(),
            );
            write(o, &io::packing_to_text(&poset, &packing))?;
            if let Some(r) = report {
                fs::write(r, format!("{}\n", asm.report))?;
            }
            let v = verify_masks(asm.n, true, &poset, &asm.copies, Mode::Almost(poset.size() as u64 - 1));
            println!("{v}");
            Ok(if v.pass { EXIT_OK } else { EXIT_FAIL })
        }
        Cmd::Verify { packing, p, mode } => {
            let poset = load_poset(p)?;
            let (pk, hash) = io::parse_packing(&read(packing)?)?;
            if hash != poset.fingerprint() {
                eprintln!("warning: packing header names a different pattern");
            }
            let r = verify_packing(&pk.ground, &poset, &pk, Mode::parse(mode)?);
            println!("{r}");
            Ok(if r.pass { EXIT_OK } else { EXIT_FAIL })
        }
        Cmd::Oracle { ground, p, o } => {
            let poset = load_poset(p)?;
            let g = GroundPoset::parse_descriptor(ground)?;
            match exact_partition_oracle(&g, &poset, budget.unwrap_or(10_000_000)) {
                Ok(Outcome::Found(pk)) => {
                    write(o, &io::packing_to_text(&poset, &pk))?;
                    println!("partition copies={}", pk.len());
                    Ok(EXIT_OK)
                }
                Ok(Outcome::Infeasible(why)) => {
                    println!("infeasible: {why}");
                    Ok(EXIT_FAIL)
                }
                Err(e) if matches!(e.root(), Error::Timeout(_)) => {
                    println!("timeout: {e}");
                    Ok(EXIT_TIMEOUT)
                }
                Err(e) => Err(e),
            }
        }
        Cmd::Svg { packing, out } => {
            let (pk, _) = io::parse_packing(&read(packing)?)?;
            svg::emit_svg(&pk, out)?;
            let owner = svg::owners(&pk)?;
            let empty = owner.iter().flatten().filter(|o| o.is_none()).count();
            println!("clusters={} unfilled={empty} cells={}", pk.len(), owner.iter().flatten().count());
            Ok(EXIT_OK)
        }
    }
}

/// Two copies of `[h]^d`, the upper one entirely above the lower.
fn stack_poset(h: u32, d: u32) -> Result<Poset> {
    let g = GroundPoset::Stack { h, d };
    let elems: Vec<_> = g.elements().collect();
    Poset::from_leq(elems.len(), |i, j| g.leq(&elems[i], &elems[j]))
}

fn get<T: std::str::FromStr>(map: &BTreeMap<String, String>, key: &str) -> Result<Option<T>> {
    map.get(key)
        .map(|v| v.parse().map_err(|_| Error::Parameter(format!("bad value for {key}: {v:?}"))))
        .transpose()
}

/// Poset and parameters from a `key=value` map; `--seed` and `--budget` win over the file.
pub fn assembly_params(map: &BTreeMap<String, String>, base: &Path, cli: &Cli) -> Result<(Poset, AssemblyParams)> {
    let known = ["poset", "n3", "k", "n1", "d", "T", "q", "retries", "seed", "exact_budget"];
    if let Some(k) = map.keys().find(|k| !known.contains(&k.as_str())) {
        return Err(Error::Parameter(format!("unknown key {k:?}")));
    }
    let poset = match map.get("poset") {
        Some(f) => io::parse_poset(&read(&base.join(f))?)?,
        None => Poset::chain(2),
    };
    let mut a = AssemblyParams::default();
    a.n3 = get(map, "n3")?.unwrap_or(a.n3);
    a.k = get(map, "k")?.unwrap_or(a.k);
    a.n1 = get(map, "n1")?.unwrap_or(a.n1);
    a.d = get(map, "d")?.unwrap_or(a.d);
    a.t = get(map, "T")?.or(a.t);
    if let Selection::Sample { q, max_retries } = &mut a.selection {
        *q = get(map, "q")?.unwrap_or(*q);
        *max_retries = get(map, "retries")?.unwrap_or(*max_retries);
    }
    a.seed = cli.seed.or(get(map, "seed")?).unwrap_or(a.seed);
    a.exact_budget = cli.budget.or(get(map, "exact_budget")?).unwrap_or(a.exact_budget);
    Ok((poset, a))
}
