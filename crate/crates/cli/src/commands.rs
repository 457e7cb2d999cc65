use std::path::PathBuf;
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::ToPrimitive;
use rayon::prelude::*;

use cosetcov_core::cover::{
    build_instance_with, exact_cover, export_instance, finite_index_sandwich_report,
    fractional_cover, greedy_cover, lift_cover, CoverInstance, CoverResult, ExactLimits,
    DEFAULT_NODE_BUDGET,
};
use cosetcov_core::doubling::{doubling_constant, hom_to_z_cover, DoublingReport};
use cosetcov_core::hom::GroupHom;
use cosetcov_core::numeric::{floor_sqrt, fmt_g12, parse_rational};
use cosetcov_core::presets::{parse_element_list, parse_roster};
use cosetcov_core::report::{BoundInputs, TSpeedInput};
use cosetcov_core::spectral::decay_trace_with;
use cosetcov_core::subgroup::{
    d_function_upper, schreier_ball_with, Coset, Dedup, SchreierOptions,
};
use cosetcov_core::walk::{
    cautiousness_probe, certify_ball_probability, checkpoints, lyons_check, simulate_walk,
    speed_table, MonotoneTable, DEFAULT_CHAIN_BUDGET, Z_SIGMAS,
};
use cosetcov_core::{
    assemble_bound_report, ball, growth_function, Error, Family, MarkedGroup, SubgroupOracle,
    Table, WalkConfig, WalkMeasure,
};

use crate::config::{parse_radii, parse_usize_list, Settings};
use crate::output::Artifacts;
use crate::{CliError, Command, Common, EXIT_BUDGET, EXIT_SOFTWARE};

const PRINT_ROWS: usize = 40;
const PRINT_WIDTH: usize = 48;
const DEFAULT_OUT: &str = "cosetcov-out";
const DEFAULT_TRIALS: u64 = 10_000;
const DEFAULT_LYONS_N: &str = "4,16,64,256";

struct Ctx {
    settings: Settings,
    group: MarkedGroup,
    artifacts: Artifacts,
    quiet: bool,
}

impl Ctx {
    fn new(common: &Common) -> Result<Self, CliError> {
        let settings = match &common.config {
            Some(p) => Settings::load(p)?,
            None => Settings::default(),
        };
        let spec: String = settings.require(common.group.clone(), "group.spec", "--group")?;
        let family = Family::parse(&spec)?;
        let group = match settings.pick(common.gens.clone(), "group.gens")? {
            Some(g) => MarkedGroup::with_generators(family, parse_element_list(family, &g)?)?,
            None => MarkedGroup::standard(family)?,
        };
        let out: PathBuf =
            settings.or(common.out.clone(), "output.dir", PathBuf::from(DEFAULT_OUT))?;
        Ok(Ctx {
            artifacts: Artifacts::new(&out)?,
            settings,
            group,
            quiet: common.quiet,
        })
    }

    fn family(&self) -> Family {
        self.group.family()
    }

    fn radii(&self, flag: Option<String>) -> Result<Vec<usize>, CliError> {
        let raw: String = self.settings.require(flag, "radius.r", "--r")?;
        parse_radii(&raw).map_err(|e| CliError::Usage(format!("radius.r: {e}")))
    }

    fn single_radius(&self, flag: Option<String>) -> Result<usize, CliError> {
        match self.radii(flag)?.as_slice() {
            [r] => Ok(*r),
            _ => Err(CliError::Usage("this command takes a single radius".into())),
        }
    }

    fn subgroup(&self, flag: Option<String>) -> Result<SubgroupOracle, CliError> {
        let d: String = self
            .settings
            .require(flag, "subgroup.descriptor", "--subgroup")?;
        Ok(SubgroupOracle::parse(self.family(), &d)?)
    }

    fn roster(&self, flag: Option<String>) -> Result<(String, Vec<SubgroupOracle>), CliError> {
        let spec = self
            .settings
            .or(flag, "roster.subgroups", "default".to_string())?;
        let roster = parse_roster(self.family(), &spec)?;
        Ok((spec, roster))
    }

    fn measure(&self, flag: Option<String>, default: &str) -> Result<WalkMeasure, CliError> {
        let spec = self
            .settings
            .or(flag, "walk.measure", default.to_string())?;
        Ok(WalkMeasure::parse(&self.group, &spec)?)
    }

    fn seed(&self, flag: Option<u64>) -> Result<u64, CliError> {
        self.settings.require(flag, "walk.seed", "--seed")
    }

    fn dedup(&self, flag: Option<String>) -> Result<Dedup, CliError> {
        match self.settings.pick(flag, "solver.dedup")?.as_deref() {
            None | Some("canonical") => Ok(Dedup::Canonical),
            Some("pairwise") => Ok(Dedup::Pairwise),
            Some(other) => Err(CliError::Usage(format!(
                "solver.dedup: expected canonical or pairwise, got `{other}`"
            ))),
        }
    }

    fn limits(&self, flag: Option<u64>) -> Result<ExactLimits, CliError> {
        Ok(ExactLimits {
            node_budget: self
                .settings
                .or(flag, "solver.node_budget", DEFAULT_NODE_BUDGET)?,
            ..ExactLimits::default()
        })
    }

    fn emit(&mut self, t: &Table) -> Result<(), CliError> {
        self.artifacts.table(t)?;
        if !self.quiet {
            show(t);
        }
        Ok(())
    }

    fn note(&self, msg: &str) {
        if !self.quiet {
            println!("{msg}");
        }
    }
}

fn show(t: &Table) {
    let mut head = t.clone();
    let hidden = head.rows.len().saturating_sub(PRINT_ROWS);
    head.rows.truncate(PRINT_ROWS);
    for cell in head.rows.iter_mut().flatten() {
        if cell.chars().count() > PRINT_WIDTH {
            *cell = cell.chars().take(PRINT_WIDTH - 3).collect::<String>() + "...";
        }
    }
    println!("== {}", t.name);
    print!("{}", head.render());
    if hidden > 0 {
        println!("... {hidden} more rows in {}.csv", t.name);
    }
}

fn rational(
    flag: Option<String>,
    settings: &Settings,
    key: &str,
    default: &str,
) -> Result<BigRational, CliError> {
    let raw = settings.or(flag, key, default.to_string())?;
    parse_rational(&raw)
        .ok_or_else(|| CliError::Usage(format!("{key}: not a rational number `{raw}`")))
}

fn q_f64(q: &BigRational) -> String {
    fmt_g12(q.to_f64().unwrap_or(f64::NAN))
}

pub(crate) fn dispatch(common: &Common, command: Command) -> Result<i32, CliError> {
    let mut ctx = Ctx::new(common)?;
    match command {
        Command::Ball { r } => cmd_ball(&mut ctx, r),
        Command::Growth { r, r0 } => cmd_growth(&mut ctx, r, r0),
        Command::Schreier {
            subgroup,
            r,
            roster,
            dedup,
        } => cmd_schreier(&mut ctx, subgroup, r, roster, dedup),
        Command::Cover {
            roster,
            r,
            exact,
            greedy,
            lp,
            mode,
            node_budget,
            dedup,
            export,
        } => {
            let modes = cover_modes(&ctx, exact, greedy, lp, mode)?;
            cmd_cover(&mut ctx, roster, r, modes, node_budget, dedup, export)
        }
        Command::Walk {
            measure,
            n,
            trials,
            seed,
            checkpoints,
            speed,
            epsilon,
            track,
        } => cmd_walk(
            &mut ctx,
            measure,
            n,
            trials,
            seed,
            checkpoints,
            speed,
            epsilon,
            track,
        ),
        Command::Lyons {
            subgroup,
            element,
            n,
            measure,
            trials,
            seed,
        } => cmd_lyons(&mut ctx, subgroup, element, n, measure, trials, seed),
        Command::Bounds {
            roster,
            r,
            seed,
            trials,
            measure,
            speed_n,
            f,
            c,
            mode,
            node_budget,
        } => cmd_bounds(
            &mut ctx,
            BoundsArgs {
                roster,
                r,
                seed,
                trials,
                measure,
                speed_n,
                f,
                c,
                mode,
                node_budget,
            },
        ),
        Command::Decay {
            subgroup,
            n,
            no_identity,
            measure,
            chain_budget,
        } => cmd_decay(&mut ctx, subgroup, n, no_identity, measure, chain_budget),
        Command::Sandwich {
            subgroup,
            subgroup_gens,
            roster,
            r,
            node_budget,
        } => cmd_sandwich(&mut ctx, subgroup, subgroup_gens, roster, r, node_budget),
        Command::Lift {
            roster,
            r,
            node_budget,
        } => cmd_lift(&mut ctx, roster, r, node_budget),
    }
}

fn cmd_ball(ctx: &mut Ctx, r: Option<String>) -> Result<i32, CliError> {
    let r = ctx.single_radius(r)?;
    let b = ball(&ctx.group, r)?;
    let mut t = Table::new("ball", &["index", "element", "length"]);
    for (i, g) in b.elements().iter().enumerate() {
        t.push(vec![
            i.to_string(),
            g.to_string(),
            b.length_at(i).to_string(),
        ]);
    }
    ctx.emit(&t)?;
    ctx.note(&format!("|B_{r}| = {} in {}", b.len(), ctx.group.name()));
    Ok(0)
}

fn doubling_table(group: &str, d: &DoublingReport) -> Table {
    let mut t = Table::new(
        "doubling",
        &[
            "group", "r", "ball", "ball_2r", "ratio", "ratio_f", "l_so_far",
        ],
    );
    for row in &d.rows {
        t.push(vec![
            group.to_string(),
            row.r.to_string(),
            row.ball.to_string(),
            row.double.to_string(),
            row.ratio.to_string(),
            q_f64(&row.ratio),
            row.l_so_far.to_string(),
        ]);
    }
    t
}

fn cmd_growth(ctx: &mut Ctx, r: Option<String>, r0: usize) -> Result<i32, CliError> {
    let r_max = ctx.radii(r)?.into_iter().max().unwrap_or(0);
    let name = ctx.group.name();
    let doubling = r_max > r0;
    let growth = growth_function(&ctx.group, if doubling { 2 * r_max } else { r_max })?;
    let mut t = Table::new("growth", &["group", "r", "ball"]);
    for (k, n) in growth.iter().enumerate().take(r_max + 1) {
        t.push(vec![name.clone(), k.to_string(), n.to_string()]);
    }
    ctx.emit(&t)?;
    if doubling {
        let d = doubling_constant(&growth, r0, r_max)?;
        ctx.emit(&doubling_table(&name, &d))?;
        ctx.note(&format!("L = {} measured on r in ({r0}, {r_max}]", d.l));
    }
    Ok(0)
}

fn cmd_schreier(
    ctx: &mut Ctx,
    subgroup: Option<String>,
    r: Option<String>,
    roster: Option<String>,
    dedup: Option<String>,
) -> Result<i32, CliError> {
    let radii = ctx.radii(r)?;
    let dedup = ctx.dedup(dedup)?;
    let subgroup = ctx.settings.pick(subgroup, "subgroup.descriptor")?;
    if subgroup.is_none() && roster.is_none() && ctx.settings.get("roster.subgroups").is_none() {
        return Err(CliError::Usage("missing --subgroup or --roster".into()));
    }
    if let Some(d) = subgroup {
        let h = SubgroupOracle::parse(ctx.family(), &d)?;
        let r_max = radii.iter().copied().max().unwrap_or(0);
        let opts = SchreierOptions {
            dedup,
            ..SchreierOptions::default()
        };
        let sb = schreier_ball_with(&ctx.group, &h, r_max, opts)?;
        let mut t = Table::new("schreier", &["index", "rep", "depth"]);
        for (i, rep) in sb.reps().iter().enumerate() {
            t.push(vec![
                i.to_string(),
                rep.to_string(),
                sb.depth_of(i).to_string(),
            ]);
        }
        ctx.emit(&t)?;
        ctx.note(&format!(
            "{}: {} cosets within distance {r_max}{}",
            h.name(),
            sb.len(),
            if sb.is_closed() {
                ", closed (finite index)"
            } else {
                ""
            }
        ));
    }
    if roster.is_some() || ctx.settings.get("roster.subgroups").is_some() {
        let (spec, roster) = ctx.roster(roster)?;
        let rows = radii
            .par_iter()
            .map(|&r| d_function_upper(&ctx.group, &roster, r))
            .collect::<Result<Vec<_>, Error>>()?;
        let mut t = Table::new(
            "dfunction",
            &[
                "group",
                "roster",
                "r",
                "upper",
                "argmin",
                "trivial_lower",
                "sizes",
                "evidence",
            ],
        );
        for d in rows {
            t.push(vec![
                ctx.group.name(),
                spec.clone(),
                d.radius.to_string(),
                d.value.to_string(),
                d.argmin_name,
                d.trivial_lower.to_string(),
                d.sizes
                    .iter()
                    .map(usize::to_string)
                    .collect::<Vec<_>>()
                    .join(";"),
                d.evidence.join(";"),
            ]);
        }
        ctx.emit(&t)?;
    }
    Ok(0)
}

#[derive(Clone, Copy, Debug, Default)]
struct CoverModes {
    greedy: bool,
    exact: bool,
    lp: bool,
}

fn cover_modes(
    ctx: &Ctx,
    exact: bool,
    greedy: bool,
    lp: bool,
    mode: Option<String>,
) -> Result<CoverModes, CliError> {
    let mut m = CoverModes { greedy, exact, lp };
    if let Some(spec) = ctx.settings.pick(mode, "solver.mode")? {
        for part in spec.split(',').map(str::trim) {
            match part {
                "greedy" => m.greedy = true,
                "exact" => m.exact = true,
                "lp" => m.lp = true,
                "all" => {
                    m = CoverModes {
                        greedy: true,
                        exact: true,
                        lp: true,
                    }
                }
                other => {
                    return Err(CliError::Usage(format!(
                        "solver.mode: expected greedy, exact, lp or all, got `{other}`"
                    )))
                }
            }
        }
    }
    if !(m.greedy || m.exact || m.lp) {
        m.greedy = true;
        m.exact = true;
    }
    Ok(m)
}

fn cover_row(
    group: &str,
    roster: &str,
    r: usize,
    res: &CoverResult,
    evidence: &str,
) -> Vec<String> {
    vec![
        group.to_string(),
        roster.to_string(),
        r.to_string(),
        res.kind.to_string(),
        res.value.to_string(),
        res.trace.proven_optimal.to_string(),
        res.trace.nodes.to_string(),
        res.trace.lower_bound.to_string(),
        res.cosets
            .iter()
            .map(Coset::to_string)
            .collect::<Vec<_>>()
            .join(";"),
        evidence.to_string(),
    ]
}

fn cmd_cover(
    ctx: &mut Ctx,
    roster: Option<String>,
    r: Option<String>,
    modes: CoverModes,
    node_budget: Option<u64>,
    dedup: Option<String>,
    export: Option<PathBuf>,
) -> Result<i32, CliError> {
    let radii = ctx.radii(r)?;
    let (spec, roster) = ctx.roster(roster)?;
    let dedup = ctx.dedup(dedup)?;
    let limits = ctx.limits(node_budget)?;
    if export.is_some() && radii.len() != 1 {
        return Err(CliError::Usage("--export needs a single radius".into()));
    }
    let group = &ctx.group;
    let solved = radii
        .par_iter()
        .map(|&r| -> Result<(CoverInstance, Vec<CoverResult>), Error> {
            let inst = build_instance_with(group, ball(group, r)?, &roster, dedup)?;
            let mut out = Vec::new();
            if modes.greedy {
                out.push(greedy_cover(&inst)?);
            }
            if modes.exact {
                out.push(exact_cover(&inst, limits)?);
            }
            if modes.lp {
                out.push(fractional_cover(&inst)?.0);
            }
            Ok((inst, out))
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let name = group.name();
    let mut t = Table::new(
        "cover",
        &[
            "group",
            "roster",
            "r",
            "kind",
            "value",
            "proven_optimal",
            "nodes",
            "lower_bound",
            "cosets",
            "evidence",
        ],
    );
    let mut unproven = false;
    for (&r, (inst, results)) in radii.iter().zip(&solved) {
        let evidence = inst.evidence_tags().join(";");
        for res in results {
            t.push(cover_row(&name, &spec, r, res, &evidence));
        }
        if modes.exact {
            unproven |= results
                .iter()
                .any(|res| res.trace.note.starts_with("not proven"));
        }
    }
    ctx.emit(&t)?;
    if let (Some(path), Some((inst, _))) = (export, solved.first()) {
        ctx.artifacts
            .write(&path, export_instance(inst).as_bytes())?;
    }
    if unproven {
        eprintln!(
            "cosetcov: exact search stopped by the node budget; incumbents reported as GreedyUpper"
        );
        return Ok(EXIT_BUDGET);
    }
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn cmd_walk(
    ctx: &mut Ctx,
    measure: Option<String>,
    n: Option<usize>,
    trials: Option<u64>,
    seed: Option<u64>,
    extra: Option<String>,
    speed: bool,
    epsilon: Option<String>,
    track: Option<String>,
) -> Result<i32, CliError> {
    let mu = ctx.measure(measure, "uniform")?;
    let n_max: usize = ctx.settings.require(n, "walk.n_max", "--n")?;
    let trials = ctx.settings.or(trials, "walk.trials", DEFAULT_TRIALS)?;
    let seed = ctx.seed(seed)?;
    let extra = match ctx.settings.pick(extra, "walk.n_list")? {
        Some(s) => {
            parse_usize_list(&s).map_err(|e| CliError::Usage(format!("walk.n_list: {e}")))?
        }
        None => Vec::new(),
    };
    let mut cfg = WalkConfig::new(n_max, trials, seed);
    cfg.extra_checkpoints = extra.clone();
    if let Some(d) = track {
        let h = SubgroupOracle::parse(ctx.family(), &d)?;
        cfg.tracked
            .push(Coset::new(Arc::new(h), ctx.group.identity()));
    }
    let stats = simulate_walk(&ctx.group, &mu, &cfg)?;
    let mut cols = vec![
        "n".to_string(),
        "mean".into(),
        "mean_f".into(),
        "std_error".into(),
    ];
    cols.extend(stats.tracked.iter().map(|c| format!("hits({c})")));
    let col_refs: Vec<&str> = cols.iter().map(String::as_str).collect();
    let mut t = Table::new("walk", &col_refs);
    for cp in &stats.checkpoints {
        let mean = stats.speed(cp.n).expect("checkpoint");
        let mut row = vec![
            cp.n.to_string(),
            mean.to_string(),
            q_f64(&mean),
            fmt_g12(stats.std_error(cp.n).expect("checkpoint")),
        ];
        row.extend(
            (0..stats.tracked.len())
                .map(|i| fmt_g12(stats.hit_frequency(cp.n, i).expect("checkpoint"))),
        );
        t.push(row);
    }
    ctx.emit(&t)?;
    if speed {
        let st = speed_table(&ctx.group, &mu, n_max, trials, seed)?;
        let mut t = Table::new("speed", &["n", "mean", "mean_f", "std_error", "smoothed"]);
        for (row, sm) in st.rows.iter().zip(st.smoothed.values()) {
            t.push(vec![
                row.n.to_string(),
                row.mean.to_string(),
                q_f64(&row.mean),
                fmt_g12(row.std_error),
                sm.to_string(),
            ]);
        }
        ctx.emit(&t)?;
    }
    if let Some(eps) = ctx.settings.pick(epsilon, "walk.epsilon")? {
        let eps = parse_rational(&eps)
            .ok_or_else(|| CliError::Usage(format!("walk.epsilon: not a rational `{eps}`")))?;
        let ns: Vec<usize> = checkpoints(n_max, &extra)
            .into_iter()
            .filter(|&n| n > 0)
            .collect();
        let probe = cautiousness_probe(&ctx.group, &mu, &eps, &ns, trials, seed)?;
        let mut t = Table::new(
            "cautious",
            &[
                "n",
                "radius",
                "hits",
                "trials",
                "p",
                "lo",
                "hi",
                "running_min",
            ],
        );
        for row in &probe.rows {
            let e = &row.estimate;
            t.push(vec![
                row.n.to_string(),
                row.radius.to_string(),
                e.hits.to_string(),
                e.trials.to_string(),
                fmt_g12(e.p),
                fmt_g12(e.lo),
                fmt_g12(e.hi),
                fmt_g12(row.running_min),
            ]);
        }
        ctx.emit(&t)?;
    }
    Ok(0)
}

fn cmd_lyons(
    ctx: &mut Ctx,
    subgroup: Option<String>,
    element: Option<String>,
    n: Option<String>,
    measure: Option<String>,
    trials: Option<u64>,
    seed: Option<u64>,
) -> Result<i32, CliError> {
    let h = ctx.subgroup(subgroup)?;
    let rep = ctx
        .settings
        .or(element, "subgroup.element", "e".to_string())?;
    let g = ctx.family().parse_element(&rep)?;
    let ns = ctx
        .settings
        .or(n, "walk.n_list", DEFAULT_LYONS_N.to_string())?;
    let ns = parse_usize_list(&ns).map_err(|e| CliError::Usage(format!("walk.n_list: {e}")))?;
    let mu = ctx.measure(measure, "uniform")?;
    let fallback = match ctx.settings.pick(seed, "walk.seed")? {
        Some(s) => Some((ctx.settings.or(trials, "walk.trials", 100_000)?, s)),
        None => None,
    };
    let table = lyons_check(&ctx.group, &mu, &h, &g, &ns, fallback)?;
    let mut t = Table::new(
        "lyons",
        &[
            "subgroup", "rep", "evidence", "n", "exact", "exact_f", "estimate", "lo", "hi",
            "bound", "bound_f", "slack", "holds",
        ],
    );
    for row in &table.rows {
        let (est, lo, hi) = match &row.estimate {
            Some(e) => (fmt_g12(e.p), fmt_g12(e.lo), fmt_g12(e.hi)),
            None => Default::default(),
        };
        t.push(vec![
            table.subgroup.clone(),
            table.rep.to_string(),
            table.evidence.tag(),
            row.n.to_string(),
            row.exact
                .as_ref()
                .map(|p| p.to_string())
                .unwrap_or_default(),
            row.exact.as_ref().map(q_f64).unwrap_or_default(),
            est,
            lo,
            hi,
            row.bound
                .as_ref()
                .map(|b| b.to_string())
                .unwrap_or_default(),
            row.bound
                .as_ref()
                .map(|b| fmt_g12(b.to_f64()))
                .unwrap_or_default(),
            fmt_g12(row.slack),
            row.holds.to_string(),
        ]);
    }
    ctx.emit(&t)?;
    if !table.holds() {
        eprintln!("cosetcov: a coset probability exceeds 4/(min mu sqrt n)");
        return Ok(EXIT_SOFTWARE);
    }
    Ok(0)
}

struct BoundsArgs {
    roster: Option<String>,
    r: Option<String>,
    seed: Option<u64>,
    trials: Option<u64>,
    measure: Option<String>,
    speed_n: Option<usize>,
    f: Option<String>,
    c: Option<String>,
    mode: Option<String>,
    node_budget: Option<u64>,
}

/// `linear` is `f(n) = n`; `sqrt:K` is `f(n) = ceil(K sqrt n)`.
fn radius_function(spec: &str) -> Result<Box<dyn Fn(usize) -> u64>, CliError> {
    if spec == "linear" {
        return Ok(Box::new(|n| n as u64));
    }
    let k = spec
        .strip_prefix("sqrt:")
        .and_then(parse_rational)
        .filter(|k| *k > BigRational::from_integer(0.into()))
        .ok_or_else(|| {
            CliError::Usage(format!("bounds.f: expected linear or sqrt:K, got `{spec}`"))
        })?;
    Ok(Box::new(move |n| {
        // ceil(K sqrt n) = floor(sqrt(K^2 n)) or one more
        let sq = &k * &k * BigRational::from_integer(n.into());
        let fl = floor_sqrt(&sq);
        if BigRational::from_integer((fl * fl).into()) == sq {
            fl
        } else {
            fl + 1
        }
    }))
}

fn cmd_bounds(ctx: &mut Ctx, a: BoundsArgs) -> Result<i32, CliError> {
    let radii = ctx.radii(a.r)?;
    let seed = ctx.seed(a.seed)?;
    let trials = ctx.settings.or(a.trials, "walk.trials", DEFAULT_TRIALS)?;
    let mu = ctx.measure(a.measure, "uniform")?;
    let speed_n = ctx.settings.or(a.speed_n, "bounds.speed_n", 256usize)?;
    let f_spec = ctx.settings.or(a.f, "bounds.f", "linear".to_string())?;
    let f = radius_function(&f_spec)?;
    let c = rational(a.c, &ctx.settings, "bounds.c", "1/2")?;
    let exact = match ctx
        .settings
        .or(a.mode, "solver.mode", "greedy".to_string())?
        .as_str()
    {
        "greedy" => false,
        "exact" => true,
        other => {
            return Err(CliError::Usage(format!(
                "solver.mode: bounds takes greedy or exact, got `{other}`"
            )))
        }
    };
    let limits = ctx.limits(a.node_budget)?;
    let (spec, roster) = ctx.roster(a.roster)?;
    let name = ctx.group.name();
    let mut summary = Table::new(
        "bounds_summary",
        &[
            "group",
            "lower_slope",
            "upper_slope",
            "lower_exponent",
            "upper_exponent",
            "both_linear",
            "doubling_l",
            "doubling_range",
            "seed",
            "trials",
        ],
    );
    let mut rows = Table::new(
        "bounds",
        &[
            "group",
            "r",
            "thm_a",
            "t_speed",
            "c_speed",
            "doubling",
            "lower",
            "roster_upper",
            "hom_upper",
            "upper",
            "consistent",
            "flags",
        ],
    );
    if radii.is_empty() {
        ctx.emit(&rows)?;
        ctx.emit(&summary)?;
        return Ok(0);
    }
    let r_max = *radii.iter().max().expect("nonempty");
    let group = &ctx.group;

    let roster_upper = radii
        .par_iter()
        .map(|&r| -> Result<(usize, u64, String), Error> {
            let inst = build_instance_with(group, ball(group, r)?, &roster, Dedup::Canonical)?;
            let res = if exact {
                exact_cover(&inst, limits)?
            } else {
                greedy_cover(&inst)?
            };
            Ok((r, res.chosen.len() as u64, res.kind.to_string()))
        })
        .collect::<Result<Vec<_>, Error>>()?;

    let dim = group.family().abelian_coordinates(&group.identity()).len();
    let hom_upper = if dim == 0 {
        None
    } else {
        let mut row = vec![0i64; dim];
        row[0] = 1;
        radii
            .par_iter()
            .map(|&r| hom_to_z_cover(group, &row, r).map(|h| (r, h.cosets.len() as u64)))
            .collect::<Result<Vec<_>, Error>>()
            .ok()
    };

    // largest doubling range whose ball 2r fits the enumeration budget
    let mut d_max = r_max.max(1);
    let growth = loop {
        match growth_function(group, 2 * d_max) {
            Ok(g) => break g,
            Err(Error::Budget { .. }) if d_max > 1 => d_max -= 1,
            Err(e) => return Err(e.into()),
        }
    };
    let doubling = doubling_constant(&growth, 0, d_max)?;

    let speed = speed_table(group, &mu, speed_n, trials, seed)?;

    let mut end = 0usize;
    while f(end) <= r_max as u64 {
        end += 1;
    }
    let f_table = MonotoneTable::from_fn(0, end, &f)?;
    let stride = (end / 32).max(1);
    let mut cfg = WalkConfig::new(end, trials, seed);
    cfg.extra_checkpoints = (0..=end).step_by(stride).collect();
    let stats = simulate_walk(group, &mu, &cfg)?;
    let certification = certify_ball_probability(&stats, &f_table, &c, Z_SIGMAS);

    let inputs = BoundInputs {
        s_size: group.size_of_generating_set(),
        roster_upper: Some(roster_upper),
        hom_upper,
        doubling: Some(doubling.clone()),
        speed: Some(speed.clone()),
        t_speed: Some(TSpeedInput {
            f: f_table,
            f_label: f_spec.clone(),
            c: c.clone(),
            min_mu: mu.min_mu(),
            certification: certification.clone(),
        }),
    };
    let report = assemble_bound_report(&name, &radii, &inputs)?;
    for row in &report.rows {
        let opt = |v: Option<u64>| v.map(|x| x.to_string()).unwrap_or_default();
        rows.push(vec![
            name.clone(),
            row.r.to_string(),
            row.thm_a.to_string(),
            row.t_speed.value.to_string(),
            row.c_speed.value.to_string(),
            row.doubling.to_string(),
            fmt_g12(row.lower()),
            opt(row.roster_upper),
            opt(row.hom_upper),
            opt(row.upper()),
            row.consistent().to_string(),
            row.flags.join("; "),
        ]);
    }
    let (ls, us, le, ue, lin) = match report.summary {
        Some(s) => (
            fmt_g12(s.lower_slope),
            fmt_g12(s.upper_slope),
            fmt_g12(s.lower_exponent),
            fmt_g12(s.upper_exponent),
            s.both_linear.to_string(),
        ),
        None => Default::default(),
    };
    summary.push(vec![
        name.clone(),
        ls,
        us,
        le,
        ue,
        lin,
        doubling.l.to_string(),
        format!("({}, {}]", doubling.r0, doubling.r_max),
        seed.to_string(),
        trials.to_string(),
    ]);

    let mut cert = Table::new(
        "certification",
        &[
            "f",
            "c",
            "n",
            "radius",
            "inside",
            "trials",
            "wilson_lo",
            "wilson_hi",
            "holds",
        ],
    );
    for row in &certification.rows {
        cert.push(vec![
            f_spec.clone(),
            c.to_string(),
            row.n.to_string(),
            row.radius.to_string(),
            row.inside.to_string(),
            row.trials.to_string(),
            fmt_g12(row.wilson_lo),
            fmt_g12(row.wilson_hi),
            row.holds.to_string(),
        ]);
    }
    let mut sp = Table::new("speed", &["n", "mean", "mean_f", "std_error", "smoothed"]);
    for (row, sm) in speed.rows.iter().zip(speed.smoothed.values()) {
        sp.push(vec![
            row.n.to_string(),
            row.mean.to_string(),
            q_f64(&row.mean),
            fmt_g12(row.std_error),
            sm.to_string(),
        ]);
    }
    ctx.artifacts.table(&doubling_table(&name, &doubling))?;
    ctx.artifacts.table(&sp)?;
    ctx.artifacts.table(&cert)?;
    ctx.emit(&rows)?;
    ctx.emit(&summary)?;
    ctx.note(&format!(
        "roster {spec}; all rows consistent: {}",
        report.consistent()
    ));
    Ok(0)
}

fn cmd_decay(
    ctx: &mut Ctx,
    subgroup: Option<String>,
    n: Option<usize>,
    no_identity: bool,
    measure: Option<String>,
    chain_budget: Option<usize>,
) -> Result<i32, CliError> {
    let h = ctx.subgroup(subgroup)?;
    let n_max: usize = ctx.settings.require(n, "walk.n_max", "--n")?;
    let budget = ctx
        .settings
        .or(chain_budget, "solver.chain_budget", DEFAULT_CHAIN_BUDGET)?;
    let default = if no_identity { "uniform" } else { "lazy" };
    let mu = ctx.measure(measure, default)?;
    let trace = decay_trace_with(&ctx.group, &mu, &h, n_max, budget)?;
    let mut t = Table::new(
        "decay",
        &[
            "n",
            "l2_squared",
            "neg_log_norm",
            "linf",
            "lyons_bound",
            "lyons_ok",
        ],
    );
    for row in &trace.rows {
        t.push(vec![
            row.n.to_string(),
            row.l2_squared.to_string(),
            fmt_g12(row.neg_log_norm()),
            row.linf.to_string(),
            row.lyons_bound
                .as_ref()
                .map(|b| b.to_string())
                .unwrap_or_default(),
            row.lyons_ok.map(|b| b.to_string()).unwrap_or_default(),
        ]);
    }
    ctx.emit(&t)?;
    let mut fit = Table::new(
        "decay_fit",
        &[
            "group",
            "subgroup",
            "measure",
            "includes_identity",
            "evidence",
            "lumped",
            "states",
            "fit",
            "epsilon_hat",
            "window",
            "monotone",
            "note",
        ],
    );
    for (label, f) in [("tail", trace.tail_fit), ("full", trace.full_fit)] {
        let (eps, window) = match f {
            Some(f) => (
                fmt_g12(f.epsilon),
                format!("{}..{}", f.window.0, f.window.1),
            ),
            None => Default::default(),
        };
        fit.push(vec![
            trace.group.clone(),
            trace.subgroup.clone(),
            trace.measure.clone(),
            trace.includes_identity.to_string(),
            trace.evidence.tag(),
            trace.lumped.to_string(),
            trace.states.to_string(),
            label.to_string(),
            eps,
            window,
            trace.monotone.map(|b| b.to_string()).unwrap_or_default(),
            "empirical, not a Kazhdan certificate".to_string(),
        ]);
    }
    ctx.emit(&fit)?;
    Ok(0)
}

fn cmd_sandwich(
    ctx: &mut Ctx,
    subgroup: Option<String>,
    subgroup_gens: Option<String>,
    roster: Option<String>,
    r: Option<String>,
    node_budget: Option<u64>,
) -> Result<i32, CliError> {
    let h_in_g = ctx.subgroup(subgroup)?;
    let gens: String = ctx
        .settings
        .require(subgroup_gens, "subgroup.gens", "--subgroup-gens")?;
    let h = MarkedGroup::with_generators(ctx.family(), parse_element_list(ctx.family(), &gens)?)?;
    let (_, roster) = ctx.roster(roster)?;
    let r_max = ctx.radii(r)?.into_iter().max().unwrap_or(0);
    let limits = ctx.limits(node_budget)?;
    let rep = finite_index_sandwich_report(&ctx.group, &h, &h_in_g, &roster, r_max, limits)?;
    let mut t = Table::new(
        "sandwich",
        &[
            "r",
            "c_h",
            "c_g",
            "scaled_radius",
            "index_times_c_h",
            "exact",
            "holds",
        ],
    );
    for row in &rep.rows {
        t.push(vec![
            row.r.to_string(),
            row.lower.to_string(),
            row.middle.to_string(),
            row.scaled_radius.to_string(),
            row.upper.to_string(),
            row.exact.to_string(),
            row.holds.to_string(),
        ]);
    }
    ctx.emit(&t)?;
    let mut s = Table::new(
        "sandwich_summary",
        &[
            "group", "subgroup", "h_gens", "index", "c", "k", "d", "qi_range", "holds",
        ],
    );
    s.push(vec![
        ctx.group.name(),
        h_in_g.name().to_string(),
        h.name(),
        rep.index.to_string(),
        rep.c.to_string(),
        rep.k.to_string(),
        rep.d.to_string(),
        rep.qi_range.to_string(),
        rep.holds.to_string(),
    ]);
    ctx.emit(&s)?;
    if !rep.holds {
        eprintln!("cosetcov: sandwich inequality failed on the computed range");
        return Ok(EXIT_SOFTWARE);
    }
    Ok(0)
}

fn cmd_lift(
    ctx: &mut Ctx,
    roster: Option<String>,
    r: Option<String>,
    node_budget: Option<u64>,
) -> Result<i32, CliError> {
    let radii = ctx.radii(r)?;
    let limits = ctx.limits(node_budget)?;
    let phi = GroupHom::abelianization(ctx.family())?;
    let quotient = phi.image_marking(&ctx.group)?;
    let spec = ctx
        .settings
        .or(roster, "roster.subgroups", "default".to_string())?;
    let q_roster = parse_roster(quotient.family(), &spec)?;
    let group = &ctx.group;
    let lifted = radii
        .par_iter()
        .map(|&r| -> Result<_, Error> {
            let inst =
                build_instance_with(&quotient, ball(&quotient, r)?, &q_roster, Dedup::Canonical)?;
            let res = exact_cover(&inst, limits)?;
            let l = lift_cover(&phi, group, &res.cosets, r)?;
            Ok((r, res, l))
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let mut t = Table::new(
        "lift",
        &[
            "group",
            "quotient",
            "r",
            "quotient_value",
            "proven_optimal",
            "lifted_size",
            "verified",
            "lifted_cosets",
        ],
    );
    for (r, res, l) in &lifted {
        t.push(vec![
            group.name(),
            quotient.name(),
            r.to_string(),
            res.chosen.len().to_string(),
            res.trace.proven_optimal.to_string(),
            l.cosets.len().to_string(),
            l.verified.to_string(),
            l.cosets
                .iter()
                .map(Coset::to_string)
                .collect::<Vec<_>>()
                .join(";"),
        ]);
    }
    ctx.emit(&t)?;
    Ok(0)
}
