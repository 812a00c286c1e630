//! The four commands. Each returns a report; failures to run become an
//! `error` field rather than a panic.

use std::path::Path;
use std::time::Instant;

use nalgebra::DMatrix;
use schottky_zeta::differentials::{
    c_gamma, det_leading_order, max_abs_deviation_from_identity, normalization_matrix_for,
    normalized_basis_change_for, pairing_matrix_for, period_determinants, CocycleConvention, HolomorphicBasis,
    SINGULAR_CONDITION,
};
use schottky_zeta::tate;
use schottky_zeta::zetaprod::{ProductEngine, TruncationPolicy};
use schottky_zeta::{Complex64, ProductValue};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::CliError;
use crate::report::{Check, RunReport};
use crate::spec::{ResolvedSpec, SpecFile};

/// `max |M - I|` accepted for the normalization matrix.
pub const NORMALIZATION_TOL: f64 = 1e-6;
/// `max |P B - I|` accepted for the basis change.
pub const DUALITY_TOL: f64 = 1e-8;
/// Accepted deviation of the fitted determinant exponent from `g - 1`.
pub const EXPONENT_TOL: f64 = 0.05;
/// Accepted relative deviation of the fitted leading coefficient.
pub const COEFFICIENT_TOL: f64 = 0.01;
/// Family parameters of the degeneration scan.
pub const SCAN_TS: [f64; 3] = [1e-2, 1e-3, 1e-4];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[derive(clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum TateSeries {
    S1,
    S3,
    S5,
    A4,
    A6,
    Delta,
    DiscCheck,
}

/// Policy shared by the numerical commands.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunOptions {
    pub max_word_len: usize,
    pub tol: f64,
    pub threads: usize,
}

fn run<F>(command: &str, threads: usize, inputs: Value, body: F) -> RunReport
where
    F: FnOnce(&mut RunReport) -> Result<(), CliError>,
{
    let start = Instant::now();
    let mut report = RunReport::new(command, threads);
    report.inputs = inputs;
    let outcome = if threads == 0 {
        Err(CliError::Usage("--threads must be at least 1".into()))
    } else {
        body(&mut report)
    };
    if let Err(e) = outcome {
        report.error = Some(e.to_string());
    }
    report.timing.elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
    report
}

fn load(path: &Path, report: &mut RunReport) -> Result<ResolvedSpec, CliError> {
    let resolved = SpecFile::load(path)?.resolve()?;
    if let Value::Object(m) = &mut report.inputs {
        m.insert("spec".into(), serde_json::to_value(&resolved.echo).expect("spec serializes"));
    }
    Ok(resolved)
}

fn inputs(path: &Path, opts: &RunOptions) -> Value {
    json!({
        "spec_path": path.display().to_string(),
        "max_word_len": opts.max_word_len,
        "tol": opts.tol,
        "threads": opts.threads,
    })
}

type CMatrix = DMatrix<Complex64>;

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("result serializes")
}

fn rows(m: &CMatrix) -> Vec<Vec<Complex64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

pub fn cmd_validate(path: &Path, opts: &RunOptions) -> RunReport {
    run("validate", opts.threads, inputs(path, opts), |report| {
        let g = load(path, report)?.group;
        let qs = g.multipliers();
        let mut results = json!({
            "genus": g.genus(),
            "multipliers": qs,
            "multiplier_moduli": qs.iter().map(|q| q.norm()).collect::<Vec<_>>(),
            "loxodromic": qs.iter().all(|q| q.norm() < 1.0 && q.norm() > 0.0),
            "real": g.is_real(),
            "normalized": g.is_normalized(),
            "circles": to_value(&g.circles()),
        });
        match g.circles() {
            Some(cs) => {
                report.checks.push(Check::above("circle_margin", cs.margin, 0.0));
                report.checks.push(Check::below(
                    "circle_mapping_residual",
                    cs.mapping_residual,
                    schottky_zeta::schottky::CIRCLE_TOLERANCE,
                ));
                report.checks.push(Check::exact("circle_sides", cs.sides_ok));
                report.checks.push(Check::exact("fixed_points_inside", cs.fixed_points_inside));
                let delta = g.delta_estimate(opts.max_word_len)?;
                results["delta_estimate"] = json!(delta);
                report.checks.push(Check::below("delta_estimate", delta, 1.0));
            }
            None => {
                let why = g.circle_error().unwrap_or("no circles").to_owned();
                results["circle_error"] = json!(why);
                report.warnings.push(format!("no fundamental circles: {why}"));
                report.checks.push(Check::exact("circles_found", false));
            }
        }
        report.results = results;
        Ok(())
    })
}

fn product_json(report: &mut RunReport, label: &str, pv: &ProductValue) -> Value {
    report.add_warnings(label, &pv.warnings);
    to_value(pv)
}

pub fn cmd_products(path: &Path, ks: Option<&[u32]>, opts: &RunOptions) -> RunReport {
    let mut inp = inputs(path, opts);
    inp["k"] = json!(ks);
    run("products", opts.threads, inp, |report| {
        let g = load(path, report)?.group;
        let policy = TruncationPolicy {
            max_word_len: opts.max_word_len,
            tolerance: opts.tol,
            threads: opts.threads,
            ..TruncationPolicy::default()
        };
        let ks: Vec<u32> = match ks {
            Some(ks) => ks.to_vec(),
            None if g.genus() >= 2 => vec![2, 3],
            None => Vec::new(),
        };
        if let Some(k) = ks.iter().find(|&&k| k < 2) {
            return Err(CliError::Usage(format!("k = {k}: weights start at 2")));
        }
        let mut engine = ProductEngine::new(&g, policy)?;
        if g.circles().is_some() {
            if let Ok(delta) = g.delta_estimate(5.min(opts.max_word_len.max(3))) {
                if delta >= 1.0 {
                    engine.warn(format!("delta estimate {delta:.3} >= 1: products may not converge"));
                }
            }
        }
        let f1 = engine.zograf_f1();
        let mut results = json!({
            "genus": g.genus(),
            "class_count": engine.spectrum().class_count(),
            "f1": product_json(report, "F(1)", &f1),
        });
        let mut per_k = Vec::new();
        for &k in &ks {
            let fk = engine.mt_fk(k)?;
            let (via_f, direct) = engine.mumford_ratio(k)?;
            let residual = (via_f.value - direct.value).norm();
            report.checks.push(Check::below(format!("mumford_ratio_k{k}"), residual, opts.tol));
            let mut entry = json!({
                "k": k,
                "d_k": schottky_zeta::zetaprod::d_k(k),
                "fk": product_json(report, &format!("F({k})"), &fk),
                "mumford_via_f": product_json(report, &format!("F(1)^d_{k}/F({k})"), &via_f),
                "mumford_direct": product_json(report, &format!("direct product k={k}"), &direct),
                "mumford_residual": residual,
            });
            if g.is_real() {
                let ruelle = engine.ruelle(k as f64);
                let modified = engine.modified_ruelle(k)?;
                let next = engine.mt_fk(k + 1)?;
                let ratio = next.value / fk.value;
                let residual = (modified.value - ratio).norm();
                report.checks.push(Check::below(format!("modified_ruelle_k{k}"), residual, opts.tol));
                entry["ruelle"] = product_json(report, &format!("R({k})"), &ruelle);
                entry["modified_ruelle"] = product_json(report, &format!("modified R({k})"), &modified);
                entry["f_ratio"] = json!(ratio);
                entry["modified_ruelle_residual"] = json!(residual);
            }
            per_k.push(entry);
        }
        results["weights"] = Value::Array(per_k);
        report.results = results;
        Ok(())
    })
}

fn parse_matrix(name: &str, data: Option<&Vec<Vec<Complex64>>>, n: usize) -> Result<CMatrix, CliError> {
    let Some(data) = data else {
        return Ok(CMatrix::identity(n, n));
    };
    if data.len() != n || data.iter().any(|r| r.len() != n) {
        return Err(CliError::Usage(format!("coefficients.{name} must be {n} x {n}")));
    }
    Ok(CMatrix::from_fn(n, n, |i, j| data[i][j]))
}

pub fn cmd_pairing(path: &Path, scan: bool, opts: &RunOptions) -> RunReport {
    let mut inp = inputs(path, opts);
    inp["scan"] = json!(scan);
    run("pairing", opts.threads, inp, |report| {
        let resolved = load(path, report)?;
        let g = resolved.group;
        let genus = g.genus();
        let coeffs = resolved.echo.coefficients.unwrap_or_default();
        let c1 = parse_matrix("one", coeffs.one.as_ref(), genus)?;
        let dim_k = 3 * genus - 3;
        let ck = parse_matrix("k", coeffs.k.as_ref(), dim_k)?;

        let basis = HolomorphicBasis::new(&g, opts.max_word_len)?;
        let m = normalization_matrix_for(&basis, opts.tol)?;
        let dev = max_abs_deviation_from_identity(&m);
        report.checks.push(Check::below("normalization", dev, NORMALIZATION_TOL));
        let policy = TruncationPolicy {
            max_word_len: opts.max_word_len,
            threads: opts.threads,
            ..TruncationPolicy::default()
        };
        let mut results = json!({
            "genus": genus,
            "normalization_matrix": rows(&m),
            "normalization_deviation": dev,
            "c_gamma": c_gamma(&g, &c1, &m, &policy)?,
        });

        if genus < 2 {
            let (omega_1, _) = period_determinants(&c1, &ck, &m, &CMatrix::identity(0, 0))?;
            results["omega_1"] = json!(omega_1);
            report.warnings.push("genus one: no quadratic differentials to pair".into());
            report.results = results;
            return Ok(());
        }

        let convention = if g.is_normalized() {
            CocycleConvention::NormalizedXi
        } else {
            CocycleConvention::GeneralZeta
        };
        let p = pairing_matrix_for(&g, &basis, opts.tol, convention)?;
        results["pairing"] = to_value(&p);
        results["pairing_determinant"] = json!(p.determinant());
        report.checks.push(Check::below("pairing_condition", p.condition, SINGULAR_CONDITION));
        if !p.singular {
            let b = normalized_basis_change_for(&p)?;
            let dual = &b.b * &p.entries;
            let (omega_1, omega_k) = period_determinants(&c1, &ck, &m, &dual)?;
            report.checks.push(Check::below("duality", b.residual, DUALITY_TOL));
            let det_product = (b.det_b * p.determinant() - 1.0).norm();
            report.checks.push(Check::below("det_b_times_det_p", det_product, DUALITY_TOL));
            results["basis_change"] = to_value(&b);
            results["omega_1"] = json!(omega_1);
            results["omega_k"] = json!(omega_k);
        }

        if scan {
            let fit = det_leading_order(
                |t| g.with_scaled_multipliers(t),
                &SCAN_TS,
                opts.max_word_len.min(6),
                opts.tol,
            )?;
            report.checks.push(Check::below(
                "det_exponent",
                (fit.exponent - fit.expected_exponent).abs(),
                EXPONENT_TOL,
            ));
            match fit.predicted {
                Some(pred) => report.checks.push(Check::below(
                    "det_coefficient",
                    (fit.coefficient / pred - 1.0).norm(),
                    COEFFICIENT_TOL,
                )),
                None => report
                    .warnings
                    .push("leading coefficient not predicted: a fixed point is at infinity".into()),
            }
            results["degeneration"] = to_value(&fit);
        }
        report.results = results;
        Ok(())
    })
}

fn series(which: TateSeries, n: usize) -> Result<tate::IntegerPowerSeries, CliError> {
    Ok(match which {
        TateSeries::S1 => tate::s_k_series(1, n),
        TateSeries::S3 => tate::s_k_series(3, n),
        TateSeries::S5 => tate::s_k_series(5, n),
        TateSeries::A4 => tate::a4_series(n),
        TateSeries::A6 => tate::a6_series(n)?,
        TateSeries::Delta | TateSeries::DiscCheck => tate::delta_series(n),
    })
}

pub fn cmd_tate(order: usize, which: TateSeries, threads: usize) -> RunReport {
    let inp = json!({ "order": order, "which": which });
    run("tate", threads, inp, |report| {
        if order == 0 {
            return Err(CliError::Usage("order must be at least 1".into()));
        }
        let s = series(which, order)?;
        let mut results = json!({
            "order": order,
            "which": which,
            "coefficients": s.to_decimal_strings(),
        });
        match which {
            TateSeries::DiscCheck => {
                let via_c = tate::discriminant_series(order)? == s;
                let via_b = tate::discriminant_series_b(order)? == s;
                results["equal_via_c4_c6"] = json!(via_c);
                results["equal_via_b_invariants"] = json!(via_b);
                report.checks.push(Check::exact("disc_c4_c6_equals_delta", via_c));
                report.checks.push(Check::exact("disc_b_invariants_equals_delta", via_b));
            }
            TateSeries::A6 => {
                let rel = &(&s.scale_i64(12) + &tate::s_k_series(3, order).scale_i64(5))
                    + &tate::s_k_series(5, order).scale_i64(7);
                report.checks.push(Check::exact("a6_relation", rel.is_zero()));
            }
            _ => {}
        }
        report.results = results;
        Ok(())
    })
}
