use std::fmt::Write as _;
use std::path::PathBuf;

use quatcm::census::{self, Count};
use quatcm::equidist::{self, ClassData};
use quatcm::genus::{genus_enumerate, spinor_partition};
use quatcm::grosslattice::{gross_lattice, theta_csv};
use quatcm::quadorders::QuadOrder;
use quatcm::quatarith::IdealClassSet;
use quatcm::rational::to_pq;
use quatcm::{Error, Result};
use serde_json::json;

use crate::cache::{write_atomic, Cache};
use crate::config::{pick_i64, pick_opt_u64, pick_u64, Config};
use crate::{Census, Cli, Command, Format, Locus, Range};

struct Ctx {
    cfg: Config,
    cache: Cache,
}

impl Ctx {
    fn locus(&self, l: &Locus) -> Result<(u64, u64)> {
        let delta = pick_u64(l.delta, &self.cfg, "delta", None)?;
        let level = pick_u64(l.level, &self.cfg, "level", Some(1))?;
        Ok((delta, level))
    }

    fn class_set(&self, l: &Locus) -> Result<IdealClassSet> {
        let (delta, level) = self.locus(l)?;
        self.cache.class_set(delta, level)
    }

    fn range(&self, r: &Range) -> Result<(u64, u64)> {
        let lo = pick_u64(r.d_min, &self.cfg, "d_min", Some(3))?;
        let hi = pick_u64(r.d_max, &self.cfg, "d_max", None)?;
        if lo > hi {
            return Err(Error::Input(format!("--d-min {lo} exceeds --d-max {hi}")));
        }
        Ok((lo, hi))
    }

    fn format(&self, flag: Option<Format>, default: Format, allowed: &[Format]) -> Result<Format> {
        let f = match flag {
            Some(f) => f,
            None => match self.cfg.string("format")?.as_deref() {
                None => default,
                Some("csv") => Format::Csv,
                Some("json") => Format::Json,
                Some("text") => Format::Text,
                Some(other) => return Err(Error::Input(format!("unknown format `{other}`"))),
            },
        };
        if !allowed.contains(&f) {
            return Err(Error::Input(format!("format {f:?} is not available for this command")));
        }
        Ok(f)
    }
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

fn class_index(flag: Option<u64>, cfg: &Config, n: usize) -> Result<Option<usize>> {
    match pick_opt_u64(flag, cfg, "class")? {
        None => Ok(None),
        Some(i) if (i as usize) < n => Ok(Some(i as usize)),
        Some(i) => Err(Error::Input(format!("class {i} out of range: the class set has {n} classes"))),
    }
}

pub fn run(cli: Cli) -> Result<()> {
    let cfg = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    let jobs = match cli.jobs {
        Some(j) => Some(j),
        None => cfg.uint("jobs")?.map(|j| j as usize),
    };
    if let Some(j) = jobs {
        if j == 0 {
            return Err(Error::Input("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
            .map_err(|e| Error::Input(format!("cannot start {j} workers: {e}")))?;
    }
    let cache_dir = match cli.cache_dir.clone() {
        Some(d) => Some(d),
        None => cfg.path("cache_dir")?,
    };
    let output = match cli.output.clone() {
        Some(o) => Some(o),
        None => cfg.path("output")?,
    };
    let ctx = Ctx { cfg, cache: Cache::new(cache_dir) };
    let text = dispatch(&ctx, &cli.command)?;
    match output {
        Some(path) => write_atomic(&path, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn dispatch(ctx: &Ctx, cmd: &Command) -> Result<String> {
    match cmd {
        Command::Classset { locus } => Ok(pretty(&ctx.class_set(locus)?.to_json())),
        Command::Gross { locus } => gross(ctx, locus),
        Command::Theta { locus, bound, class, out_dir } => theta(ctx, locus, *bound, *class, out_dir.clone()),
        Command::Genus { locus, class } => genus(ctx, locus, *class),
        Command::Embed { locus, disc, conductor } => embed(ctx, locus, *disc, *conductor),
        Command::Equidist { locus, p, range, c_min, c_max, format } => {
            equidist_cmd(ctx, locus, *p, range, (*c_min, *c_max), *format)
        }
        Command::Census { which } => census_cmd(ctx, which),
    }
}

fn gross(ctx: &Ctx, locus: &Locus) -> Result<String> {
    let s = ctx.class_set(locus)?;
    let mut out = String::from("class,unit_order,b11,b12,b13,b22,b23,b33,det\n");
    for (i, c) in s.classes.iter().enumerate() {
        let l = gross_lattice(&c.left_order)?;
        let g = l.gram6();
        let _ = writeln!(
            out,
            "{i},{},{},{},{},{},{},{},{}",
            c.unit_order, g[0], g[1], g[2], g[3], g[4], g[5],
            l.det_integer().map(|d| d.to_string()).unwrap_or_else(|| to_pq(&l.det()))
        );
    }
    Ok(out)
}

fn theta(ctx: &Ctx, locus: &Locus, bound: Option<u64>, class: Option<u64>, out_dir: Option<PathBuf>) -> Result<String> {
    let bound = pick_u64(bound, &ctx.cfg, "bound", None)?;
    if bound == 0 {
        return Err(Error::Input("--bound must be positive".into()));
    }
    let s = ctx.class_set(locus)?;
    let picked: Vec<usize> = match class_index(class, &ctx.cfg, s.len())? {
        Some(i) => vec![i],
        None => (0..s.len()).collect(),
    };
    let out_dir = out_dir.or(ctx.cfg.path("out_dir")?);
    let mut out = String::new();
    for &i in &picked {
        let csv = theta_csv(&gross_lattice(&s.classes[i].left_order)?, bound)?;
        if let Some(dir) = &out_dir {
            let path = dir.join(format!("theta-{}-{}-{i}.csv", s.delta(), s.level()));
            write_atomic(&path, csv.as_bytes())?;
            let _ = writeln!(out, "{}", path.display());
        } else if picked.len() == 1 {
            out.push_str(&csv);
        } else {
            let _ = writeln!(out, "# delta={} level={} class={i}", s.delta(), s.level());
            out.push_str(&csv);
        }
    }
    Ok(out)
}

fn genus(ctx: &Ctx, locus: &Locus, class: Option<u64>) -> Result<String> {
    let s = ctx.class_set(locus)?;
    let i = class_index(class, &ctx.cfg, s.len())?.unwrap_or(0);
    let g = genus_enumerate(&gross_lattice(&s.classes[i].left_order)?)?;
    let second = spinor_partition(&g, g.primes.1)?;
    let mut doc = g.to_json();
    doc["delta"] = json!(s.delta());
    doc["level"] = json!(s.level());
    doc["class"] = json!(i);
    doc["primes"] = json!([g.primes.0, g.primes.1]);
    doc["spinor_partition_second_prime"] = json!(second);
    doc["mass"] = json!(to_pq(&g.mass()));
    Ok(pretty(&doc))
}

fn embed(ctx: &Ctx, locus: &Locus, disc: Option<i64>, conductor: Option<u64>) -> Result<String> {
    let d = pick_i64(disc, &ctx.cfg, "disc")?;
    let c = pick_u64(conductor, &ctx.cfg, "conductor", Some(1))?;
    QuadOrder::new(d, c)?;
    let s = ctx.class_set(locus)?;
    let gross = s.classes.iter().map(|k| gross_lattice(&k.left_order)).collect::<Result<Vec<_>>>()?;
    let e = equidist::embedding_number(&s, &gross, d, c)?;
    Ok(pretty(&json!({
        "delta": s.delta(),
        "level": s.level(),
        "D": e.d,
        "c": e.c,
        "counts": e.counts,
        "total": e.total,
        "class_number": e.class_number,
        "unit_orders": s.unit_orders(),
    })))
}

fn equidist_cmd(
    ctx: &Ctx,
    locus: &Locus,
    p: Option<u64>,
    range: &Range,
    c: (Option<u64>, Option<u64>),
    format: Option<Format>,
) -> Result<String> {
    let (delta, level) = ctx.locus(locus)?;
    let p = pick_u64(p, &ctx.cfg, "p", None)?;
    let d_range = ctx.range(range)?;
    let c_lo = pick_u64(c.0, &ctx.cfg, "c_min", Some(1))?;
    let c_hi = pick_u64(c.1, &ctx.cfg, "c_max", Some(c_lo))?;
    if c_lo == 0 || c_lo > c_hi {
        return Err(Error::Input(format!("conductor range [{c_lo}, {c_hi}] is empty or contains 0")));
    }
    let format = ctx.format(format, Format::Csv, &[Format::Csv, Format::Json])?;
    equidist::Locus::of(delta, level, p)?;
    let data = ClassData::from_set(&ctx.cache.class_set(delta, level)?)?;
    let ex = equidist::convergence_experiment(&data, p, d_range, (c_lo, c_hi))?;
    for d in &ex.diagnostics {
        eprintln!("quatcm: note: {d}");
    }
    Ok(match format {
        Format::Json => pretty(&ex.to_json()),
        _ => ex.to_csv(),
    })
}

fn census_cmd(ctx: &Ctx, which: &Census) -> Result<String> {
    match which {
        Census::Genus { locus } => {
            let (delta, level) = ctx.locus(locus)?;
            Ok(format!("{}\n", census::shimura_genus(delta, level)?))
        }
        Census::Ss { p, genus } => {
            let p = pick_u64(*p, &ctx.cfg, "p", None)?;
            let g = pick_u64(*genus, &ctx.cfg, "genus", None)?;
            Ok(match census::supersingular_count(p, g)? {
                Count::Value(v) => format!("{v}\n"),
                Count::Inapplicable => "inapplicable\n".to_string(),
            })
        }
        Census::Ssp { locus, p } => {
            let (delta, level) = ctx.locus(locus)?;
            let p = pick_u64(*p, &ctx.cfg, "p", None)?;
            Ok(format!("{}\n", census::superspecial_count(delta, p, level)?))
        }
        Census::Dualgraph { locus, p, format } => {
            let (delta, level) = ctx.locus(locus)?;
            let p = pick_u64(*p, &ctx.cfg, "p", None)?;
            let format = ctx.format(*format, Format::Text, &[Format::Text, Format::Json])?;
            if !quatcm::arith::is_prime(p) || delta % p != 0 {
                return Err(Error::Input(format!("{p} must be a prime dividing Δ = {delta}")));
            }
            let genus = census::shimura_genus(delta, level)?;
            let vert = ctx.cache.class_set(delta / p, level)?;
            let edges = ctx.cache.class_set(delta / p, level * p)?;
            let g = census::dual_graph_from(delta, p, &vert, &edges)?;
            if g.betti() != genus as i64 {
                return Err(Error::Consistency(format!("dual graph at p={p} has b1 = {}, genus is {genus}", g.betti())));
            }
            Ok(match format {
                Format::Json => pretty(&g.to_json()),
                _ => g.edge_list(),
            })
        }
        Census::Ratio { locus, range, format } => {
            let s = ctx.class_set(locus)?;
            let d_range = ctx.range(range)?;
            let format = ctx.format(*format, Format::Csv, &[Format::Csv, Format::Json])?;
            let rows = census::ratio_experiment(&ClassData::from_set(&s)?, d_range)?;
            Ok(match format {
                Format::Json => pretty(&json!({
                    "delta": s.delta(),
                    "level": s.level(),
                    "rows": rows.iter().map(|r| json!({
                        "D": r.d,
                        "h": r.h,
                        "r_star": r.reps,
                        "ratios": r.ratios.iter().map(to_pq).collect::<Vec<_>>(),
                        "max_ratio": to_pq(&r.max_ratio()),
                    })).collect::<Vec<_>>(),
                })),
                _ => census::ratio_csv(&rows, s.len()),
            })
        }
    }
}
