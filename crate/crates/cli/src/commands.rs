use std::path::Path;

use rand::Rng;
use serde::Serialize;

use freemax::attraction::{
    balkema_de_haan_check, convergence_report, fit_gpd, norming_constants, NormingConstants,
    NormingRecipe,
};
use freemax::cdf::table::{read_samples, read_table, write_table};
use freemax::cdf::{
    classical_max_conv, free_max_conv, free_max_iterate, free_min_conv, ks_distance, rescale,
    sup_distance, GridSpec,
};
use freemax::laws::catalog::catalog;
use freemax::laws::{
    f_c_map, make_law, minimized_stability_distance, stability_constants, verify_max_stable,
    FreeType, LawKind, LawSpec,
};
use freemax::poisson::{
    extremal_process_report, realize_triangular_process, triangular_law_cdf,
    triangular_subset_max, FreePoissonSample, Partition, ProcessReport, SubsetId, SubsetRecord,
};
use freemax::spectral::io::{read_matrix, write_eigenvalues, write_matrix};
use freemax::spectral::{
    empirical_spectral_cdf, general_position_check, haar_conjugate, haar_projection,
    logexp_approx, pnorm_approx, random_symmetric, spectral_leq, spectral_max, spectral_min,
    HermitianMatrix, RngSeed,
};
use freemax::Cdf;

use crate::args::*;
use crate::{csv_rows, CliError, CliResult, Context, ErrorCode, Payload};

pub(crate) fn dispatch(
    cli: &Cli,
    ctx: &mut Context,
) -> CliResult<(String, Option<u64>, Payload)> {
    let (name, seed, payload) = match &cli.command {
        Command::Law(a) => ("law", None, law(a, ctx)?),
        Command::Conv(a) => ("conv", None, conv(a, ctx)?),
        Command::Iterate(a) => ("iterate", None, iterate(a, ctx)?),
        Command::Stable(a) => ("stable", None, stable(a, ctx)?),
        Command::Attract(a) => ("attract", None, attract(a, ctx)?),
        Command::Pot(a) => ("pot", a.seed, pot(a, ctx)?),
        Command::Spectral(a) => spectral(&a.task, ctx)?,
        Command::Poisson(a) => ("poisson", a.seed, poisson(a, ctx)?),
    };
    Ok((name.to_string(), seed, payload))
}

/// LawSpec JSON, a catalog name, or an `x,F` table file.
fn load_law(spec: &str, ctx: &mut Context) -> CliResult<Cdf> {
    let s = spec.trim();
    if s.starts_with('{') {
        let spec: LawSpec = serde_json::from_str(s).map_err(|e| {
            CliError::new(ErrorCode::InvalidArgument, format!("law `{s}`: {e}"))
        })?;
        return Ok(make_law(&spec)?);
    }
    if let Some((_, f)) = catalog().into_iter().find(|(name, _)| *name == s) {
        return Ok(f);
    }
    let bytes = ctx.read(Path::new(s))?;
    Ok(read_table(bytes.as_slice())?)
}

fn grid_for(g: &GridArgs, cdfs: &[&Cdf]) -> CliResult<Vec<f64>> {
    if g.x.is_empty() {
        Ok(GridSpec::with_points(g.grid_points).build(cdfs)?)
    } else {
        Ok(g.x.clone())
    }
}

fn require_seed(seed: Option<u64>, what: &str) -> CliResult<RngSeed> {
    seed.map(RngSeed).ok_or_else(|| CliError::missing_seed(what))
}

#[derive(Serialize)]
struct CdfRow {
    x: f64,
    #[serde(rename = "F")]
    f: f64,
}

fn law(a: &LawArgs, ctx: &mut Context) -> CliResult<Payload> {
    let mut f = load_law(&a.law, ctx)?;
    if let Some(c) = a.fc {
        f = f_c_map(&f, c)?;
    }
    let grid = grid_for(&a.grid, &[&f])?;
    let rows: Vec<CdfRow> = grid.iter().map(|&x| CdfRow { x, f: f.cdf(x) }).collect();
    let mut csv = Vec::new();
    write_table(&f, &grid, &mut csv)?;
    Payload::new(&rows, csv)
}

#[derive(Serialize)]
struct ConvRow {
    x: f64,
    #[serde(rename = "F")]
    f: f64,
    #[serde(rename = "G")]
    g: f64,
    #[serde(rename = "H")]
    h: f64,
}

#[derive(Serialize)]
struct HomomorphismRow {
    /// `image`: f_1 of a classical law vs the free type; `product`:
    /// f_c(F·G) vs f_c(F) ⊡ f_c(G).
    check: &'static str,
    c: f64,
    left: String,
    right: String,
    sup_distance: f64,
}

fn std_law(kind: LawKind, shape: f64) -> CliResult<Cdf> {
    Ok(make_law(&LawSpec::with_shape(kind, shape))?)
}

fn default_grid_sup(f: &Cdf, g: &Cdf, points: usize) -> CliResult<f64> {
    let grid = GridSpec::with_points(points).build(&[f, g])?;
    Ok(sup_distance(f, g, &grid))
}

fn conv(a: &ConvArgs, ctx: &mut Context) -> CliResult<Payload> {
    if a.homomorphism {
        return homomorphism(a);
    }
    let [fl, gl] = a.laws.as_slice() else {
        return Err(CliError::usage(format!(
            "conv needs exactly two --law arguments, got {}",
            a.laws.len()
        )));
    };
    let f = load_law(fl, ctx)?;
    let g = load_law(gl, ctx)?;
    let h = match a.op {
        ConvOp::FreeMax => free_max_conv(&f, &g),
        ConvOp::FreeMin => free_min_conv(&f, &g),
        ConvOp::ClassicalMax => classical_max_conv(&f, &g),
    };
    let grid = grid_for(&a.grid, &[&f, &g, &h])?;
    let rows: Vec<ConvRow> = grid
        .iter()
        .map(|&x| ConvRow {
            x,
            f: f.cdf(x),
            g: g.cdf(x),
            h: h.cdf(x),
        })
        .collect();
    Payload::rows(&rows)
}

fn homomorphism(a: &ConvArgs) -> CliResult<Payload> {
    let pts = a.grid.grid_points;
    let mut rows = Vec::new();
    for alpha in [0.5, 1.0, 2.0] {
        let images = [
            ("gumbel", std_law(LawKind::ClassicalGumbel, 1.0)?, FreeType::I),
            ("frechet", std_law(LawKind::ClassicalFrechet, alpha)?, FreeType::II),
            ("weibull", std_law(LawKind::ClassicalWeibull, alpha)?, FreeType::III),
        ];
        for (name, classical, kind) in images {
            if kind == FreeType::I && alpha != 1.0 {
                continue;
            }
            rows.push(HomomorphismRow {
                check: "image",
                c: 1.0,
                left: format!("{name}_{alpha}"),
                right: format!("free_{kind:?}_{alpha}"),
                sup_distance: default_grid_sup(&f_c_map(&classical, 1.0)?, &kind.law(alpha)?, pts)?,
            });
        }
    }
    let laws = catalog();
    for &c in &a.c {
        for (i, (nf, f)) in laws.iter().enumerate() {
            for (ng, g) in &laws[i..] {
                let lhs = f_c_map(&classical_max_conv(f, g), c)?;
                let rhs = free_max_conv(&f_c_map(f, c)?, &f_c_map(g, c)?);
                rows.push(HomomorphismRow {
                    check: "product",
                    c,
                    left: nf.to_string(),
                    right: ng.to_string(),
                    sup_distance: default_grid_sup(&lhs, &rhs, pts)?,
                });
            }
        }
    }
    Payload::rows(&rows)
}

#[derive(Serialize)]
struct NormingRow {
    n: u64,
    a_n: f64,
    b_n: f64,
    recipe: NormingRecipe,
    sup_distance: f64,
}

fn norming_rows(
    f: &Cdf,
    kind: FreeType,
    alpha: f64,
    ns: &[u64],
    points: usize,
) -> CliResult<Vec<NormingRow>> {
    let target = kind.law(alpha)?;
    let consts = ns
        .iter()
        .map(|&n| norming_constants(f, n, kind))
        .collect::<freemax::Result<Vec<NormingConstants>>>()?;
    let report = convergence_report(f, &target, &consts, &GridSpec::with_points(points))?;
    let mut rows: Vec<NormingRow> = report
        .into_iter()
        .map(|r| {
            let recipe = consts.iter().find(|c| c.n == r.n).map(|c| c.recipe);
            NormingRow {
                n: r.n,
                a_n: r.a_n,
                b_n: r.b_n,
                recipe: recipe.unwrap_or(NormingRecipe::Custom),
                sup_distance: r.sup_distance,
            }
        })
        .collect();
    rows.sort_by_key(|r| r.n);
    Ok(rows)
}

fn iterate(a: &IterateArgs, ctx: &mut Context) -> CliResult<Payload> {
    let f = load_law(&a.law, ctx)?;
    Payload::rows(&norming_rows(&f, a.kind, a.alpha, &a.n, a.grid_points)?)
}

fn attract(a: &AttractArgs, ctx: &mut Context) -> CliResult<Payload> {
    let f = load_law(&a.law, ctx)?;
    Payload::rows(&norming_rows(&f, a.kind, a.alpha, &a.n, a.grid_points)?)
}

#[derive(Serialize)]
struct FixedPointRow {
    #[serde(rename = "type")]
    kind: FreeType,
    alpha: f64,
    n: u64,
    a_of_s: f64,
    b_of_s: f64,
    sup_distance: f64,
}

#[derive(Serialize)]
struct StabilityRow {
    k: u64,
    stable: bool,
    quartile_a: f64,
    quartile_b: f64,
    quartile_sup_distance: f64,
    minimized_a: f64,
    minimized_b: f64,
    minimized_sup_distance: f64,
}

fn stable(a: &StableArgs, ctx: &mut Context) -> CliResult<Payload> {
    let grid = GridSpec::with_points(a.grid_points);
    if let Some(spec) = &a.law {
        let g = load_law(spec, ctx)?;
        let mut rows = Vec::new();
        for &k in &a.k {
            let v = verify_max_stable(&g, k, a.tol, &grid)?;
            let m = minimized_stability_distance(&g, k, &grid)?;
            rows.push(StabilityRow {
                k,
                stable: v.stable,
                quartile_a: v.a,
                quartile_b: v.b,
                quartile_sup_distance: v.sup_distance,
                minimized_a: m.a,
                minimized_b: m.b,
                minimized_sup_distance: m.sup_distance,
            });
        }
        return Payload::rows(&rows);
    }
    let kinds = if a.kinds.is_empty() {
        vec![FreeType::I, FreeType::II, FreeType::III]
    } else {
        a.kinds.clone()
    };
    let alphas = if a.alpha.is_empty() { vec![1.0] } else { a.alpha.clone() };
    if a.n.is_empty() {
        return Err(CliError::usage("stable needs --n (or --law)"));
    }
    let mut rows = Vec::new();
    for &kind in &kinds {
        for &alpha in &alphas {
            let g = kind.law(alpha)?;
            let points = grid.build(&[&g])?;
            for &n in &a.n {
                let c = stability_constants(kind, alpha, n as f64)?;
                let h = rescale(&free_max_iterate(&g, n)?, c.a_of_s, c.b_of_s)?;
                rows.push(FixedPointRow {
                    kind,
                    alpha,
                    n,
                    a_of_s: c.a_of_s,
                    b_of_s: c.b_of_s,
                    sup_distance: sup_distance(&h, &g, &points),
                });
            }
        }
    }
    Payload::rows(&rows)
}

fn pot(a: &PotArgs, ctx: &mut Context) -> CliResult<Payload> {
    let single_u = || -> CliResult<Option<f64>> {
        match a.u.as_slice() {
            [] => Ok(None),
            [u] => Ok(Some(*u)),
            _ => Err(CliError::usage("a GPD fit takes a single --u")),
        }
    };
    let samples = if let Some(path) = &a.samples {
        let bytes = ctx.read(path)?;
        read_samples(bytes.as_slice())?
    } else {
        let spec = a
            .law
            .as_deref()
            .ok_or_else(|| CliError::usage("pot needs --samples or --law"))?;
        let f = load_law(spec, ctx)?;
        if let Some(gamma) = a.gamma {
            if a.u.is_empty() {
                return Err(CliError::usage("the Balkema–de Haan check needs --u"));
            }
            let rows =
                balkema_de_haan_check(&f, gamma, &a.u, &GridSpec::with_points(a.grid_points))?;
            return Payload::rows(&rows);
        }
        let draws = a
            .draws
            .ok_or_else(|| CliError::usage("with --law, pot needs --gamma or --draws"))?;
        let mut rng = require_seed(a.seed, "sampling from --law")?.rng();
        (0..draws)
            .map(|_| f.quantile(rng.gen::<f64>()))
            .collect::<freemax::Result<Vec<f64>>>()?
    };
    let exceedances: Vec<f64> = match single_u()? {
        Some(u) => samples.iter().filter(|&&x| x > u).map(|&x| x - u).collect(),
        None => samples,
    };
    let fit = fit_gpd(&exceedances)?;
    Payload::new(&fit, csv_rows(&[fit])?)
}

#[derive(Serialize)]
struct EigenRow {
    index: usize,
    lambda: f64,
}

#[derive(Serialize)]
struct LeqRow {
    leq: bool,
}

#[derive(Serialize)]
struct PositionRow {
    trial: usize,
    rank_p: usize,
    rank_q: usize,
    rank_join: usize,
    rank_meet: usize,
    expected_join: usize,
    expected_meet: usize,
    holds: bool,
}

#[derive(Serialize)]
struct IdentityRow {
    pair: usize,
    op: &'static str,
    max_error: f64,
}

#[derive(Serialize)]
struct ApproxRow {
    pair: usize,
    p: f64,
    distance: f64,
    /// Smallest eigenvalue of the step from the previous `p`.
    min_step_eigenvalue: Option<f64>,
}

fn read_pair(a: &Path, b: &Path, ctx: &mut Context) -> CliResult<(HermitianMatrix, HermitianMatrix)> {
    let a = read_matrix(ctx.read(a)?.as_slice())?;
    let b = read_matrix(ctx.read(b)?.as_slice())?;
    Ok((a, b))
}

fn matrix_payload(m: &HermitianMatrix, full: bool) -> CliResult<Payload> {
    let mut csv = Vec::new();
    if full {
        write_matrix(m, &mut csv)?;
        let rows: Vec<Vec<f64>> = (0..m.dim())
            .map(|i| m.matrix().row(i).iter().copied().collect())
            .collect();
        Payload::new(&rows, csv)
    } else {
        write_eigenvalues(m, &mut csv)?;
        let rows: Vec<EigenRow> = m
            .eigenvalues()
            .iter()
            .enumerate()
            .map(|(index, &lambda)| EigenRow { index, lambda })
            .collect();
        Payload::new(&rows, csv)
    }
}

fn spectral(
    task: &SpectralTask,
    ctx: &mut Context,
) -> CliResult<(&'static str, Option<u64>, Payload)> {
    Ok(match task {
        SpectralTask::Max(f) => {
            let (a, b) = read_pair(&f.a, &f.b, ctx)?;
            ("spectral max", None, matrix_payload(&spectral_max(&a, &b)?, f.matrix)?)
        }
        SpectralTask::Min(f) => {
            let (a, b) = read_pair(&f.a, &f.b, ctx)?;
            ("spectral min", None, matrix_payload(&spectral_min(&a, &b)?, f.matrix)?)
        }
        SpectralTask::Leq(f) => {
            let (a, b) = read_pair(&f.a, &f.b, ctx)?;
            let row = LeqRow {
                leq: spectral_leq(&a, &b)?,
            };
            ("spectral leq", None, Payload::new(&row, csv_rows(&[&row])?)?)
        }
        SpectralTask::GeneralPosition(g) => {
            let root = require_seed(g.seed, "spectral general-position")?;
            if g.ranks.is_empty() {
                return Err(CliError::usage("--ranks is empty"));
            }
            let m = g.ranks.len();
            let mut rows = Vec::with_capacity(g.trials);
            for k in 0..g.trials {
                let (r1, r2) = (g.ranks[k % m], g.ranks[k / m % m]);
                let p = haar_projection(g.n, r1, root.child(2 * k as u64))?;
                let q = haar_projection(g.n, r2, root.child(2 * k as u64 + 1))?;
                let c = general_position_check(&p, &q, 0.0)?;
                rows.push(PositionRow {
                    trial: k,
                    rank_p: c.rank_p,
                    rank_q: c.rank_q,
                    rank_join: c.rank_join,
                    rank_meet: c.rank_meet,
                    expected_join: c.expected_join,
                    expected_meet: c.expected_meet,
                    holds: c.holds,
                });
            }
            ("spectral general-position", g.seed, Payload::rows(&rows)?)
        }
        SpectralTask::Identity(g) => {
            let root = require_seed(g.seed, "spectral identity")?;
            let mut rows = Vec::new();
            for k in 0..g.pairs as u64 {
                let a = random_symmetric(g.n, root.child(3 * k));
                let b = haar_conjugate(
                    &random_symmetric(g.n, root.child(3 * k + 1)),
                    root.child(3 * k + 2),
                );
                let (fa, fb) = (empirical_spectral_cdf(&a), empirical_spectral_cdf(&b));
                for (op, m, oracle) in [
                    ("max", spectral_max(&a, &b)?, free_max_conv(&fa, &fb)),
                    ("min", spectral_min(&a, &b)?, free_min_conv(&fa, &fb)),
                ] {
                    let fm = empirical_spectral_cdf(&m);
                    let max_error = a
                        .spectrum()
                        .iter()
                        .chain(b.spectrum())
                        .chain(m.spectrum())
                        .map(|&x| (fm.cdf(x) - oracle.cdf(x)).abs())
                        .fold(0.0, f64::max);
                    rows.push(IdentityRow {
                        pair: k as usize,
                        op,
                        max_error,
                    });
                }
            }
            ("spectral identity", g.seed, Payload::rows(&rows)?)
        }
        SpectralTask::Approx(g) => ("spectral approx", g.seed, approx(g, ctx)?),
    })
}

fn approx_pairs(g: &ApproxArgs, ctx: &mut Context) -> CliResult<Vec<(HermitianMatrix, HermitianMatrix)>> {
    let mut pairs = Vec::new();
    if g.spin {
        let a = HermitianMatrix::from_diagonal(&[1.0, -1.0])?;
        let b = HermitianMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]])?;
        pairs.push((a.shifted(2.0), b.shifted(2.0)));
    }
    if g.pairs > 0 {
        let root = require_seed(g.seed, "random pairs")?;
        for k in 0..g.pairs as u64 {
            let a = random_symmetric(g.n, root.child(2 * k));
            let b = random_symmetric(g.n, root.child(2 * k + 1));
            if g.method == ApproxMethod::Pnorm && !g.shift {
                let c = -a.spectrum()[0].min(b.spectrum()[0]).min(0.0);
                pairs.push((a.shifted(c), b.shifted(c)));
            } else {
                pairs.push((a, b));
            }
        }
    }
    if let (Some(a), Some(b)) = (&g.a, &g.b) {
        pairs.push(read_pair(a, b, ctx)?);
    }
    if pairs.is_empty() {
        return Err(CliError::usage("approx needs --spin, --pairs or --a/--b"));
    }
    Ok(pairs)
}

fn approx(g: &ApproxArgs, ctx: &mut Context) -> CliResult<Payload> {
    let pairs = approx_pairs(g, ctx)?;
    let mut rows = Vec::new();
    for (i, (a, b)) in pairs.iter().enumerate() {
        let target = spectral_max(a, b)?;
        let mut prev: Option<HermitianMatrix> = None;
        for &p in &g.p {
            let m = match g.method {
                ApproxMethod::Pnorm => pnorm_approx(a, b, p, g.shift)?,
                ApproxMethod::Logexp => logexp_approx(a, b, p)?,
            };
            let step = match &prev {
                Some(q) => Some(m.sub(q)?.eigenvalues()[0]),
                None => None,
            };
            rows.push(ApproxRow {
                pair: i,
                p,
                distance: m.frobenius_distance(&target),
                min_step_eigenvalue: step,
            });
            prev = Some(m);
        }
    }
    Payload::rows(&rows)
}

#[derive(Serialize)]
struct TriangularRow {
    subset: String,
    #[serde(rename = "N")]
    n: usize,
    mass: f64,
    ks_distance: f64,
}

fn poisson(a: &PoissonArgs, ctx: &mut Context) -> CliResult<Payload> {
    let seed = require_seed(a.seed, "poisson")?;
    let partition = Partition::from_reader(ctx.read(&a.partition)?.as_slice())?;
    let subsets: Vec<SubsetId> = match &a.subsets {
        Some(s) => partition.subsets(s)?,
        None => partition.power_set(),
    };
    if a.triangular {
        let mut rows = Vec::new();
        for &n in &a.n {
            let z = realize_triangular_process(&partition, n, seed)?;
            for s in &subsets {
                let mass = partition.mass(s);
                let zmax = triangular_subset_max(&z, s)?;
                rows.push(TriangularRow {
                    subset: partition.label(s),
                    n,
                    mass,
                    ks_distance: ks_distance(zmax.spectrum(), &triangular_law_cdf(mass)?)?,
                });
            }
        }
        return Payload::rows(&rows);
    }
    if let Some(dir) = &a.dump_eigenvalues {
        dump_eigenvalues(&partition, &subsets, a.n[0], seed, dir)?;
    }
    let reports = a
        .n
        .iter()
        .map(|&n| extremal_process_report(&partition, &subsets, n, a.trials, seed))
        .collect::<freemax::Result<Vec<ProcessReport>>>()?;
    let records: Vec<&SubsetRecord> = reports.iter().flat_map(|r| &r.records).collect();
    let csv = csv_rows(&records)?;
    match reports.as_slice() {
        [one] => Payload::new(one, csv),
        _ => Payload::new(&reports, csv),
    }
}

/// Eigenvalues of `Π(ω)` for the first trial, which uses `seed.child(0)`.
fn dump_eigenvalues(
    partition: &Partition,
    subsets: &[SubsetId],
    n: usize,
    seed: RngSeed,
    dir: &Path,
) -> CliResult<()> {
    let out_err = |e: std::io::Error| CliError::new(ErrorCode::OutputFailed, e.to_string());
    std::fs::create_dir_all(dir).map_err(out_err)?;
    let sample = FreePoissonSample::new(partition, n, seed.child(0))?;
    for s in subsets {
        let name = format!("pi_{}.csv", partition.label(s).replace(',', "-"));
        let file = std::fs::File::create(dir.join(name)).map_err(out_err)?;
        write_eigenvalues(&sample.pi(s), file)?;
    }
    Ok(())
}
