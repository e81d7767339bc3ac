use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};
use nalgebra::DMatrix;
use serde_json::{json, Value};

use blid_core::cohomology::{residual_order_check, solve_truncated, LinearAuto};
use blid_core::extension::{extend, Germ};
use blid_core::jets::JetSequence;
use blid_core::{BlidMap, CqElement, PointwiseBlid, ScaledBlid, TaylorIntegralBlid};

use crate::config::SuiteConfig;

/// Parses a blid selector: `pointwise`, `taylor:<k>` or `scaled:<c>`.
pub fn parse_blid(spec: &str, cfg: &SuiteConfig) -> Result<BlidMap> {
    let bump = cfg.bump();
    match spec.split_once(':') {
        None if spec == "pointwise" => Ok(BlidMap::Pointwise(PointwiseBlid::new(bump))),
        Some(("taylor", k)) => {
            let k: usize = k.parse().with_context(|| format!("bad order in `{spec}`"))?;
            Ok(BlidMap::TaylorIntegral(TaylorIntegralBlid::new(bump, k)))
        }
        Some(("scaled", c)) => {
            let c: f64 = c.parse().with_context(|| format!("bad level in `{spec}`"))?;
            Ok(BlidMap::Scaled(ScaledBlid::new(bump, c)?))
        }
        _ => bail!("unknown blid `{spec}`; expected pointwise, taylor:<k> or scaled:<c>"),
    }
}

/// Applies a catalog germ through a blid to one serialized element.
pub fn extend_once(
    cfg: &SuiteConfig,
    germ_name: &str,
    blid_spec: &str,
    input: &Path,
) -> Result<Value> {
    let germ = Germ::catalog(germ_name)?;
    let blid = parse_blid(blid_spec, cfg)?;
    let text = std::fs::read_to_string(input)
        .with_context(|| format!("reading element {}", input.display()))?;
    let element: CqElement = serde_json::from_str(&text)
        .with_context(|| format!("parsing element {}", input.display()))?;
    let map = extend(germ, blid)?;
    let value = map.eval(&element)?;
    Ok(json!({
        "germ": germ_name,
        "blid": map.blid.kind_label(),
        "agreement_radius": map.agreement_radius(),
        "value": value,
    }))
}

/// Solves the conjugacy equation degree by degree for a serialized matrix
/// and jet sequence, reporting the solution and its residual decay.
pub fn cohomology_once(matrix_path: &Path, jets_path: &Path, order: Option<u32>) -> Result<Value> {
    let text = std::fs::read_to_string(matrix_path)
        .with_context(|| format!("reading matrix {}", matrix_path.display()))?;
    let rows: Vec<Vec<f64>> = serde_json::from_str(&text)
        .with_context(|| format!("parsing matrix {}", matrix_path.display()))?;
    let d = rows.len();
    if d == 0 || rows.iter().any(|r| r.len() != d) {
        bail!("matrix {} must be square and nonempty", matrix_path.display());
    }
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    let auto = LinearAuto::new(DMatrix::from_row_slice(d, d, &flat))?;

    let text = std::fs::read_to_string(jets_path)
        .with_context(|| format!("reading jets {}", jets_path.display()))?;
    let jets = JetSequence::from_json(&text)?;
    if jets.dim != d {
        bail!("jets have dimension {} but the matrix is {d}x{d}", jets.dim);
    }

    let order = order.unwrap_or_else(|| jets.max_degree());
    let solution = solve_truncated(&auto, &jets, order)?;
    let residual = residual_order_check(&auto, &jets, &solution)?;

    let terms: Vec<Value> = solution
        .terms
        .iter()
        .map(|poly| {
            let coefficients: BTreeMap<String, Vec<f64>> = poly
                .basis()
                .iter()
                .zip(&poly.coeffs)
                .filter(|(_, c)| c.norm() > 0.0)
                .map(|(idx, c)| (idx.to_string(), vec![c.re, c.im]))
                .collect();
            json!({ "degree": poly.degree, "coefficients": coefficients })
        })
        .collect();

    Ok(json!({
        "dimension": d,
        "order": order,
        "eigenvalues": auto
            .eigenvalues
            .iter()
            .map(|l| vec![l.re, l.im])
            .collect::<Vec<_>>(),
        "terms": terms,
        "residual": serde_json::to_value(&residual)?,
    }))
}

/// Writes a one-shot result to `output`, or pretty-prints it to stdout.
pub fn deliver(value: &Value, output: Option<&Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    match output {
        Some(path) => {
            std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
        }
        None => print!("{text}"),
    }
    Ok(())
}

