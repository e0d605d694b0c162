use std::io::{self, Write};

use serde::Serialize;
use tensorid::generic_id::{AttemptOutcome, GenericError};
use tensorid::specific_id::{DecompositionError, FieldChoice};
use tensorid::sweep::{self, SweepError};
use tensorid::{
    check_generic, check_specific, exception_lookup, kruskal_generic_bound, Decomposition, Rational, Shape,
    SpecificConfig, SpecificVerdict, SweepConfig, VerdictKind,
};

use crate::table;
use crate::{
    CliError, ExpectedRankArgs, GenericArgs, SpecificArgs, SweepArgs, TableArgs, EXIT_DATA, EXIT_DEFECT,
    EXIT_INCONCLUSIVE, EXIT_IO, EXIT_NO_INPUT, EXIT_OK, EXIT_USAGE,
};

type Out<'a> = dyn Write + 'a;

fn parse_shape(s: &str) -> Result<Shape, CliError> {
    s.parse::<Shape>()
        .map_err(|e| CliError::new(EXIT_USAGE, format!("--shape: {e}")))
}

fn print_json<T: Serialize>(out: &mut Out<'_>, value: &T) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut *out, value).map_err(|e| CliError::new(EXIT_IO, e.to_string()))?;
    writeln!(out)?;
    Ok(())
}

fn generic_error(e: GenericError) -> CliError {
    match e {
        GenericError::InvalidRank { .. }
        | GenericError::ZeroRank
        | GenericError::NoRetries
        | GenericError::Field(_) => CliError::new(EXIT_USAGE, e.to_string()),
        other => CliError::new(EXIT_DEFECT, other.to_string()),
    }
}

pub fn verdict_exit(kind: &VerdictKind) -> i32 {
    match kind {
        VerdictKind::Proved | VerdictKind::ProvedWeaklyDefectivePath => EXIT_OK,
        VerdictKind::Inconclusive { .. } => EXIT_INCONCLUSIVE,
        VerdictKind::DefectiveSuspected | VerdictKind::KnownException { .. } => EXIT_DEFECT,
    }
}

fn field_name(prime: Option<u32>) -> String {
    prime.map_or("Q".to_string(), |q| format!("GF({q})"))
}

pub fn generic(args: &GenericArgs, out: &mut Out<'_>) -> Result<i32, CliError> {
    let shape = parse_shape(&args.shape)?;
    let r = args.rank.unwrap_or_else(|| shape.rbar());
    let v = check_generic(&shape, r, &args.search.config()).map_err(generic_error)?;
    if args.json {
        print_json(out, &v)?;
        return Ok(verdict_exit(&v.kind));
    }
    let summary = match &v.kind {
        VerdictKind::Proved => "generically identifiable".to_string(),
        VerdictKind::ProvedWeaklyDefectivePath => "generically identifiable (weakly defective case)".to_string(),
        VerdictKind::Inconclusive { reason } => format!("inconclusive: {reason}"),
        VerdictKind::DefectiveSuspected => "defective (kernel larger than expected)".to_string(),
        VerdictKind::KnownException { exception } => {
            format!("known exception ({}): {}", exception.kind, exception.note)
        }
    };
    writeln!(
        out,
        "shape {} rank {} (r-bar {}): {}",
        v.shape,
        v.r,
        v.shape.rbar(),
        summary
    )?;
    for (i, a) in v.attempts.iter().enumerate() {
        let hessian = match (a.hessian_rank, a.target) {
            (Some(h), Some(t)) => format!(", hessian rank {h}/{t}"),
            _ => String::new(),
        };
        let outcome = match a.outcome {
            AttemptOutcome::Proved => "proved",
            AttemptOutcome::ProvedWeaklyDefectivePath => "proved",
            AttemptOutcome::DefectiveGate => "kernel too large",
            AttemptOutcome::HessianShort => "hessian short",
        };
        writeln!(
            out,
            "  attempt {}: {} seed {}, kernel {} (expected {}){} -> {}",
            i + 1,
            field_name(a.prime),
            a.seed,
            a.kernel_dim,
            a.expected_ell,
            hessian,
            outcome
        )?;
    }
    writeln!(out, "  elapsed {} ms", v.elapsed.as_millis())?;
    Ok(verdict_exit(&v.kind))
}

fn decomposition_error(e: DecompositionError, path: &std::path::Path) -> CliError {
    match e {
        DecompositionError::Io(io) if io.kind() == io::ErrorKind::NotFound => {
            CliError::new(EXIT_NO_INPUT, format!("{}: {io}", path.display()))
        }
        DecompositionError::Io(io) => CliError::new(EXIT_IO, format!("{}: {io}", path.display())),
        DecompositionError::Field(f) => CliError::new(EXIT_USAGE, f.to_string()),
        other => CliError::new(EXIT_DATA, format!("{}: {other}", path.display())),
    }
}

pub fn specific_exit(verdict: &SpecificVerdict) -> i32 {
    if verdict.is_unique() {
        EXIT_OK
    } else {
        EXIT_INCONCLUSIVE
    }
}

pub fn specific(args: &SpecificArgs, out: &mut Out<'_>) -> Result<i32, CliError> {
    let dec: Decomposition<Rational> =
        Decomposition::from_path(&args.input).map_err(|e| decomposition_error(e, &args.input))?;
    let config = SpecificConfig {
        p: args.p,
        rotations: args.rotations.map(usize::from),
        field: args.prime.map_or(FieldChoice::Exact, FieldChoice::Prime),
        skip_smoothness: args.skip_smoothness,
        compress: !args.no_compress,
    };
    let report = check_specific(&dec, &config).map_err(|e| decomposition_error(e, &args.input))?;
    let code = specific_exit(&report.verdict);
    if args.json {
        print_json(out, &report)?;
        return Ok(code);
    }
    let verdict = match &report.verdict {
        SpecificVerdict::Unique => "unique".to_string(),
        SpecificVerdict::UniqueAssumingNonsingularity => "unique assuming nonsingularity".to_string(),
        SpecificVerdict::ModularEvidence { prime } => format!("modular evidence over GF({prime}), not a proof"),
        SpecificVerdict::Inconclusive { stage, reason } => format!("inconclusive at {stage:?}: {reason}"),
    };
    let fmt_dims = |d: &[usize]| d.iter().map(ToString::to_string).collect::<Vec<_>>().join("x");
    writeln!(
        out,
        "decomposition of rank {} in {}: {}",
        report.r,
        fmt_dims(&report.input_dims),
        verdict
    )?;
    writeln!(out, "  core {}", fmt_dims(&report.core_dims))?;
    if let Some(c) = &report.smoothness {
        writeln!(
            out,
            "  smoothness (p = {}): image dim {} of {} ({:?})",
            c.p,
            c.image_dim,
            c.target,
            c.status()
        )?;
        for rot in &c.rotations {
            writeln!(
                out,
                "    rotation {}: flattening rank {} (expected {}), kernel {}, cokernel {}",
                rot.rotation, rot.flattening_rank, rot.expected_rank, rot.kernel_dim, rot.cokernel_dim
            )?;
        }
        if let Some(reason) = &c.reason {
            writeln!(out, "    {reason}")?;
        }
    }
    if report.tangent_rows > 0 {
        writeln!(out, "  tangent matrix {}x{}", report.tangent_rows, report.tangent_cols)?;
    }
    if let (Some(k), Some(l)) = (report.kernel_dim, report.expected_ell) {
        writeln!(out, "  left kernel dim {k} (expected {l})")?;
    }
    for h in &report.hessians {
        writeln!(
            out,
            "  point {}: hessian {}x{} ({} blocks), rank {}",
            h.point + 1,
            h.rows,
            h.cols,
            h.blocks,
            h.rank
        )?;
    }
    if let Some(k) = &report.kruskal {
        writeln!(
            out,
            "  kruskal: k-ranks {:?}, sum {} vs 2r+2 = {}: {}",
            k.k_ranks,
            k.k_ranks.iter().sum::<usize>(),
            2 * k.r + 2,
            if k.certified { "certified" } else { "not certified" }
        )?;
    }
    writeln!(out, "  elapsed {} ms", report.elapsed.as_millis())?;
    Ok(code)
}

fn sweep_error(e: SweepError) -> CliError {
    match e {
        SweepError::Io(_) | SweepError::Json(_) => CliError::new(EXIT_IO, e.to_string()),
        SweepError::Generic { source, .. } => generic_error(source),
        SweepError::Pool(_) => CliError::new(EXIT_USAGE, e.to_string()),
    }
}

pub fn sweep(args: &SweepArgs, out: &mut Out<'_>) -> Result<i32, CliError> {
    let config = SweepConfig {
        max_pi: args.max_pi,
        max_order: args.max_order.unwrap_or(usize::MAX),
        jobs: args.jobs,
        out_path: args.out.clone(),
        resume: args.resume,
        generic: args.search.config(),
    };
    let summary = tensorid::run_sweep(&config).map_err(sweep_error)?;
    if args.json {
        print_json(out, &summary)?;
        return Ok(EXIT_OK);
    }
    writeln!(
        out,
        "{} shapes with Π <= {} ({} computed now), records in {}",
        summary.shapes,
        args.max_pi,
        summary.computed,
        args.out.display()
    )?;
    for (tag, n) in &summary.counts {
        writeln!(out, "  {tag}: {n}")?;
    }
    let records = sweep::read_records(&args.out).map_err(sweep_error)?;
    let mut flagged: Vec<_> = records
        .iter()
        .filter(|r| !matches!(r.verdict.as_str(), "proved" | "proved_weakly_defective_path"))
        .collect();
    flagged.sort_by(|a, b| a.shape.cmp(&b.shape));
    for r in flagged {
        let exception = r.exception.map_or(String::new(), |k| format!(" ({k})"));
        writeln!(out, "  {:?} r={}: {}{}", r.shape, r.r, r.verdict, exception)?;
    }
    Ok(EXIT_OK)
}

pub fn table(args: &TableArgs, out: &mut Out<'_>) -> Result<i32, CliError> {
    let bad = |flag: &str, v: &str| CliError::new(EXIT_USAGE, format!("{flag}: expected a..b, got {v:?}"));
    let rows = table::parse_range(&args.rows).ok_or_else(|| bad("--rows", &args.rows))?;
    let cols = table::parse_range(&args.cols).ok_or_else(|| bad("--cols", &args.cols))?;
    if *rows.start() < 2 || *cols.start() < 2 {
        return Err(CliError::new(EXIT_USAGE, "dimensions must be at least 2"));
    }
    let config = args.search.config();
    let compute = || table::compute_table(rows.clone(), cols.clone(), &config);
    let cells = match args.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::new(EXIT_USAGE, e.to_string()))?
            .install(compute),
        None => compute(),
    }
    .map_err(generic_error)?;
    if args.json {
        print_json(out, &cells)?;
    } else {
        write!(out, "{}", table::render(&cells))?;
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct ExpectedRank {
    shape: Shape,
    pi: usize,
    sigma: usize,
    rbar: usize,
    perfect: bool,
    ell_at_rbar: i64,
    kruskal: Option<usize>,
    exception_at_rbar: Option<tensorid::KnownException>,
}

pub fn expected_rank(args: &ExpectedRankArgs, out: &mut Out<'_>) -> Result<i32, CliError> {
    let shape = parse_shape(&args.shape)?;
    let d = shape.derive();
    let report = ExpectedRank {
        pi: d.pi,
        sigma: d.sigma,
        rbar: d.rbar,
        perfect: d.perfect,
        ell_at_rbar: d.ell_at_rbar,
        kruskal: kruskal_generic_bound(&shape).ok(),
        exception_at_rbar: exception_lookup(&shape, d.rbar),
        shape,
    };
    if args.json {
        print_json(out, &report)?;
        return Ok(EXIT_OK);
    }
    writeln!(out, "shape {}", report.shape)?;
    writeln!(out, "  Π = {}, Σ = {}", report.pi, report.sigma)?;
    writeln!(
        out,
        "  r-bar = {}{}, ℓ at r-bar = {}",
        report.rbar,
        if report.perfect { " (perfect)" } else { "" },
        report.ell_at_rbar
    )?;
    if let Some(k) = report.kruskal {
        writeln!(out, "  kruskal generic bound = {k}")?;
    }
    if let Some(e) = report.exception_at_rbar {
        writeln!(out, "  known exception at r-bar ({}): {}", e.kind, e.note)?;
    }
    Ok(EXIT_OK)
}
