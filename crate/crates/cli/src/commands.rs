use serde_json::{json, Map, Value};

use levi_core::invariants::{classify_point, pseudoconvexity_scan, LeviSign, PseudoconvexityVerdict};
use levi_core::strata::{
    detect_stratum, sample_hypersurface, DimensionEstimate, NecessaryCondition, Region, StratumOptions,
};
use levi_core::submanifold::{
    locate_common_zeros, nondegeneracy_check, rank_test, verify_parametrized, verify_radical_generators,
    wedge_check, DefiningSystem, Parametrization, ParametrizationClause, ParametrizationVerdict, RadicalClause,
    RadicalVerdict, RankKind, SubmanifoldError, WedgeVerdict,
};
use levi_core::{CVector, Hypersurface};

use crate::config::{complex_point, ProblemConfig};
use crate::error::CliError;
use crate::report::{
    convention_json, coordinate_cells, coordinate_header, format_float, levi_record, levi_table, point_json,
    sign_label, Table,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Analyze,
    Strata,
    Submanifold,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Analyze => "analyze",
            Command::Strata => "strata",
            Command::Submanifold => "submanifold",
        }
    }
}

/// Structured report plus its per-point table for CSV export.
#[derive(Debug, Clone)]
pub struct Output {
    pub report: Value,
    pub table: Table,
}

pub fn run(command: Command, cfg: &ProblemConfig) -> Result<Output, CliError> {
    let h = build_hypersurface(cfg)?;
    let region = cfg.region.build(cfg.dim)?;
    match command {
        Command::Analyze => analyze(&h, cfg, &region),
        Command::Strata => strata(&h, cfg, &region),
        Command::Submanifold => submanifold(&h, cfg, &region),
    }
}

pub fn build_hypersurface(cfg: &ProblemConfig) -> Result<Hypersurface, CliError> {
    let tol = cfg.tolerances.resolve();
    Hypersurface::from_source(&cfg.rho, cfg.dim, tol).map_err(|e| match e {
        levi_core::Error::Parse(p) => CliError::syntax("rho", &cfg.rho, &p),
        levi_core::Error::Geometry(g) => g.into(),
        levi_core::Error::VarSpace(v) => CliError::Config(v.to_string()),
        other => CliError::Numerical(other.to_string()),
    })
}

fn envelope(command: Command, h: &Hypersurface, cfg: &ProblemConfig, sign: LeviSign) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
    m.insert("command".into(), json!(command.name()));
    m.insert("convention".into(), convention_json(sign, h.tol()));
    m.insert("hypersurface".into(), json!({ "rho": cfg.rho, "N": cfg.dim }));
    m
}

fn analyze(h: &Hypersurface, cfg: &ProblemConfig, region: &Region) -> Result<Output, CliError> {
    let sample = sample_hypersurface(h, region)?;
    if sample.points.is_empty() {
        return Err(CliError::NoData(format!(
            "none of the {} seeds converged onto the hypersurface",
            sample.seeds
        )));
    }
    let scan = pseudoconvexity_scan(h, &sample.points)?;
    let records = sample
        .points
        .iter()
        .map(|x| classify_point(h, x, scan.sign))
        .collect::<Result<Vec<_>, _>>()?;

    let mut nullity_counts = vec![0usize; h.cr_dim() + 1];
    for r in &records {
        nullity_counts[r.nullity] += 1;
    }
    let verdict = match scan.verdict {
        PseudoconvexityVerdict::Pseudoconvex(s) => format!("pseudoconvex({})", sign_label(s)),
        PseudoconvexityVerdict::NotPseudoconvex => "not-pseudoconvex".to_string(),
        PseudoconvexityVerdict::Undetermined => "undetermined".to_string(),
    };
    let mut report = envelope(Command::Analyze, h, cfg, scan.sign);
    report.insert(
        "results".into(),
        Value::Array(records.iter().map(|r| Value::Object(levi_record(r))).collect()),
    );
    report.insert(
        "summary".into(),
        json!({
            "seeds": sample.seeds,
            "samples": sample.points.len(),
            "dropped": sample.dropped,
            "merged": sample.merged,
            "verdict": verdict,
            "violations": scan.violations,
            "witness": scan.witness.as_ref().map(point_json),
            "witness_eigenvalues": scan.witness_eigenvalues,
            "nullity_counts": nullity_counts,
        }),
    );
    let refs: Vec<_> = records.iter().collect();
    Ok(Output {
        report: Value::Object(report),
        table: levi_table(cfg.dim, &refs),
    })
}

fn strata(h: &Hypersurface, cfg: &ProblemConfig, region: &Region) -> Result<Output, CliError> {
    let q = cfg.strata.q.unwrap_or(1);
    let center = match &cfg.strata.center {
        Some(c) if c.len() != cfg.dim => {
            return Err(CliError::Config(format!(
                "strata.center has {} coordinates, expected {}",
                c.len(),
                cfg.dim
            )))
        }
        Some(c) => Some(complex_point(c)),
        None => None,
    };
    let opts = StratumOptions {
        center,
        radius: cfg.strata.radius,
        sign: LeviSign::Positive,
    };
    let report = detect_stratum(h, region, q, &opts)?;
    if report.sampled == 0 {
        return Err(CliError::NoData(format!(
            "none of the {} seeds converged onto the hypersurface",
            report.seeds
        )));
    }
    let (dimension, status, found, required) = match report.dimension {
        DimensionEstimate::Dim(d) => (Some(d), "estimated", None, None),
        DimensionEstimate::Insufficient { found, required } => (None, "insufficient", Some(found), Some(required)),
        DimensionEstimate::Empty => (None, "empty", None, None),
    };
    let verdict = match report.verdict {
        NecessaryCondition::Pass => "PASS",
        NecessaryCondition::Fail => "FAIL",
        NecessaryCondition::Insufficient => "INSUFFICIENT",
    };
    let results = report
        .members
        .iter()
        .map(|m| {
            let mut r = levi_record(&m.data);
            r.insert("residuals".into(), json!(m.residuals));
            Value::Object(r)
        })
        .collect();
    let mut out = envelope(Command::Strata, h, cfg, report.sign);
    out.insert("results".into(), Value::Array(results));
    out.insert(
        "summary".into(),
        json!({
            "q": q,
            "seeds": report.seeds,
            "sampled": report.sampled,
            "members": report.members.len(),
            "rejected": report.rejected,
            "dimension": dimension,
            "dimension_status": status,
            "found": found,
            "required": required,
            "center": point_json(&report.center),
            "radius": report.radius,
            "necessary_condition": verdict,
        }),
    );
    let refs: Vec<_> = report.members.iter().map(|m| &m.data).collect();
    Ok(Output {
        report: Value::Object(out),
        table: levi_table(cfg.dim, &refs),
    })
}

fn parse_system(h: &Hypersurface, functions: &[String], k: Option<usize>, what: &str) -> Result<DefiningSystem, CliError> {
    DefiningSystem::parse(functions, h.space(), k).map_err(|e| match e {
        SubmanifoldError::Parse(p) => {
            let offending = functions
                .iter()
                .position(|f| levi_core::parse(f, h.space()).is_err())
                .unwrap_or(0);
            CliError::syntax(&format!("{what}[{offending}]"), &functions[offending], &p)
        }
        other => other.into(),
    })
}

fn rank_label(kind: RankKind) -> String {
    match kind {
        RankKind::ComplexManifold { complex_dim } => format!("complex-manifold(dim {complex_dim})"),
        RankKind::RankTooHigh => "rank-too-high".into(),
        RankKind::RankTooLow => "rank-too-low".into(),
        RankKind::RankNotConstant => "rank-not-constant".into(),
    }
}

fn submanifold(h: &Hypersurface, cfg: &ProblemConfig, region: &Region) -> Result<Output, CliError> {
    if cfg.system.is_none() && cfg.parametrization.is_none() && cfg.generators.is_none() {
        return Err(CliError::Config(
            "submanifold needs a [system], [parametrization] or [generators] block".into(),
        ));
    }
    let n = h.cr_dim();
    let mut candidates = Vec::new();
    let mut header = vec!["candidate".to_string()];
    header.extend(coordinate_header(cfg.dim));
    header.extend(["residual".to_string(), "rank".to_string()]);
    let mut table = Table {
        header,
        rows: Vec::new(),
    };

    if let Some(sc) = &cfg.system {
        let sys = parse_system(h, &sc.functions, sc.k, "system.functions")?;
        let zeros = locate_common_zeros(h, &sys, region)?;
        if zeros.points.is_empty() {
            return Err(CliError::NoData("the system has no common zeros on the sampled hypersurface".into()));
        }
        let nd = nondegeneracy_check(h, &sys, &zeros.points)?;
        let rank = rank_test(h, &sys, &zeros.points)?;
        let wedge_q = sc.q.unwrap_or(n.saturating_sub(rank.k));
        let wedge = wedge_check(h, &sys, wedge_q, &zeros.points)?;
        let verdict = if nd.nondegenerate {
            rank_label(rank.kind)
        } else {
            "degenerate-system".to_string()
        };
        let wedge_verdict = match &wedge.verdict {
            WedgeVerdict::Pass => json!({ "verdict": "PASS" }),
            WedgeVerdict::FailIndependent { witness } => {
                json!({ "verdict": "FAIL(a)", "witness": point_json(witness) })
            }
            WedgeVerdict::FailDependent { function, witness } => {
                json!({ "verdict": "FAIL(b)", "function": function, "witness": point_json(witness) })
            }
        };
        let points: Vec<Value> = zeros
            .points
            .iter()
            .zip(&rank.ranks)
            .map(|(x, r)| json!({ "point": point_json(&x.point), "residual": x.residual, "rank": r }))
            .collect();
        for (x, r) in zeros.points.iter().zip(&rank.ranks) {
            let mut row = vec!["system".to_string()];
            row.extend(coordinate_cells(&x.point));
            row.push(format_float(x.residual));
            row.push(r.to_string());
            table.rows.push(row);
        }
        candidates.push(json!({
            "candidate": "system",
            "functions": sc.functions,
            "k": rank.k,
            "verdict": verdict,
            "nondegeneracy": {
                "nondegenerate": nd.nondegenerate,
                "min_ratio": nd.min_ratio,
                "witness": nd.witness.as_ref().map(point_json),
            },
            "rank": {
                "min": rank.min_rank,
                "max": rank.max_rank,
                "tol": rank.tol,
                "verdict": rank_label(rank.kind),
            },
            "wedge": {
                "q": wedge_q,
                "min_block_gram": wedge.min_block_gram,
                "max_extended_gram": wedge.max_extended_gram,
                "result": wedge_verdict,
            },
            "seeds": zeros.seeds,
            "rejected": zeros.rejected,
            "points": points,
        }));
    }

    if let Some(pc) = &cfg.parametrization {
        let f = Parametrization::parse(&pc.components, pc.q).map_err(|e| match e {
            SubmanifoldError::Parse(p) => {
                let offending = pc
                    .components
                    .iter()
                    .position(|c| Parametrization::parse(std::slice::from_ref(c), pc.q).is_err())
                    .unwrap_or(0);
                CliError::syntax(
                    &format!("parametrization.components[{offending}]"),
                    &pc.components[offending],
                    &p,
                )
            }
            other => other.into(),
        })?;
        let params: Vec<CVector> = match (&pc.params, &pc.grid) {
            (Some(list), _) => list.iter().map(|u| complex_point(u)).collect(),
            (None, Some(grid)) => grid.build(pc.q)?.seeds(),
            (None, None) => Region::cube(pc.q, 0.5, 3, 0)?.seeds(),
        };
        let r = verify_parametrized(h, &f, &params)?;
        let (verdict, detail) = match &r.verdict {
            ParametrizationVerdict::Pass => ("PASS".to_string(), Value::Null),
            ParametrizationVerdict::Fail { clause, witness, value } => {
                let tag = match clause {
                    ParametrizationClause::OnHypersurface => "a",
                    ParametrizationClause::Holomorphic => "b",
                    ParametrizationClause::Tangent => "c",
                    ParametrizationClause::Immersion => "d",
                };
                (
                    format!("FAIL({tag})"),
                    json!({ "witness": point_json(witness), "value": value }),
                )
            }
        };
        candidates.push(json!({
            "candidate": "parametrization",
            "components": pc.components,
            "q": pc.q,
            "verdict": verdict,
            "failure": detail,
            "samples": r.samples,
            "max_residual": r.max_residual,
            "max_antiholomorphic": r.max_antiholomorphic,
            "max_tangency": r.max_tangency,
            "min_rank": r.min_rank,
        }));
    }

    if let Some(gc) = &cfg.generators {
        let gens = parse_system(h, &gc.functions, None, "generators.functions")?;
        let r = verify_radical_generators(h, &gens, gc.q, region)?;
        let (verdict, witness) = match &r.verdict {
            RadicalVerdict::PassNecessary => ("PASS-necessary".to_string(), None),
            RadicalVerdict::Fail { clause, witness } => {
                let tag = match clause {
                    RadicalClause::VanishOnStratum => "a",
                    RadicalClause::ZerosInStratum => "b",
                    RadicalClause::Nondegenerate => "c",
                    RadicalClause::Rank => "d",
                };
                (format!("FAIL({tag})"), witness.as_ref())
            }
            RadicalVerdict::NoData => {
                return Err(CliError::NoData(
                    "neither the stratum nor the generators' zero set produced sample points".into(),
                ))
            }
        };
        candidates.push(json!({
            "candidate": "generators",
            "functions": gc.functions,
            "q": gc.q,
            "verdict": verdict,
            "witness": witness.map(point_json),
            "stratum_members": r.stratum_members,
            "common_zeros": r.common_zeros,
            "rank": r.rank.as_ref().map(|v| rank_label(v.kind)),
        }));
    }

    let mut out = envelope(Command::Submanifold, h, cfg, LeviSign::Positive);
    out.insert("results".into(), Value::Array(candidates));
    Ok(Output {
        report: Value::Object(out),
        table,
    })
}
