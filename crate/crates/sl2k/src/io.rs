//! JSON file formats and report serialization.
//!
//! Module files hold the additive-basis presentation: field data, carrier
//! dimension, and one generator triple per K-basis index. Entries are plain
//! integers in [0, p) in positive characteristic and reduced fraction
//! strings "num/den" with positive denominator over Q.

use std::collections::BTreeMap;

use num::BigInt;
use serde_json::{json, Map, Value};

use crate::coherence::CoherenceVerdict;
use crate::decomposition::{ClassificationReport, SabReport};
use crate::error::{Error, Result};
use crate::field::{FieldSpec, Scalar};
use crate::identities::IdentityReport;
use crate::linearization::{ScalarAction, Separation, SeriesReport};
use crate::matrix::{Matrix, Subspace};
use crate::module::{GeneratorTriple, ModuleMap, SL2Module, ValidationReport};

pub fn scalar_to_value(s: &Scalar) -> Value {
    match s {
        Scalar::Fp(a) => json!(a),
        Scalar::Fq(v) => json!(v),
        Scalar::Q(r) => Value::String(format!("{}/{}", r.numer(), r.denom())),
    }
}

pub fn value_to_scalar(field: &FieldSpec, v: &Value) -> Result<Scalar> {
    let bad = || Error::Malformed(format!("bad scalar {v} for this field"));
    if field.is_rational() {
        match v {
            Value::String(s) => {
                let (n, d) = match s.split_once('/') {
                    Some((n, d)) => (n, d),
                    None => (s.as_str(), "1"),
                };
                let num: BigInt = n.trim().parse().map_err(|_| bad())?;
                let den: BigInt = d.trim().parse().map_err(|_| bad())?;
                field.from_fraction(num, den)
            }
            Value::Number(n) => {
                let i = n.as_i64().ok_or_else(bad)?;
                Ok(field.from_int(i))
            }
            _ => Err(bad()),
        }
    } else {
        let p = field.characteristic();
        match v {
            Value::Number(n) => {
                let x = n.as_u64().ok_or_else(bad)?;
                if x >= p {
                    return Err(bad());
                }
                Ok(field.from_int(x as i64))
            }
            Value::Array(items) => {
                if field.extension_degree() != items.len() {
                    return Err(bad());
                }
                let mut coeffs = Vec::with_capacity(items.len());
                for it in items {
                    let x = it.as_u64().ok_or_else(bad)?;
                    if x >= p {
                        return Err(bad());
                    }
                    coeffs.push(x);
                }
                Ok(field.from_coeffs(&coeffs))
            }
            _ => Err(bad()),
        }
    }
}

pub fn matrix_to_value(m: &Matrix) -> Value {
    let rows: Vec<Value> = (0..m.rows())
        .map(|i| {
            Value::Array(
                (0..m.cols())
                    .map(|j| scalar_to_value(m.get(i, j)))
                    .collect(),
            )
        })
        .collect();
    Value::Array(rows)
}

pub fn value_to_matrix(field: &FieldSpec, v: &Value, rows: usize, cols: usize) -> Result<Matrix> {
    let arr = v
        .as_array()
        .ok_or_else(|| Error::Malformed("matrix must be an array of rows".into()))?;
    if arr.len() != rows {
        return Err(Error::Malformed(format!(
            "expected {rows} rows, found {}",
            arr.len()
        )));
    }
    let mut entries = Vec::with_capacity(rows * cols);
    for row in arr {
        let row = row
            .as_array()
            .ok_or_else(|| Error::Malformed("matrix row must be an array".into()))?;
        if row.len() != cols {
            return Err(Error::Malformed(format!(
                "expected {cols} columns, found {}",
                row.len()
            )));
        }
        for item in row {
            entries.push(value_to_scalar(field, item)?);
        }
    }
    Ok(Matrix::new(field.clone(), rows, cols, entries))
}

fn field_entries(field: &FieldSpec) -> Vec<(&'static str, Value)> {
    let mut out = vec![
        ("characteristic", json!(field.characteristic())),
        ("extension_degree", json!(field.extension_degree())),
    ];
    if let Some(m) = field.modulus() {
        out.push(("modulus", json!(m)));
    }
    out
}

pub fn field_to_value(field: &FieldSpec) -> Value {
    let mut map = Map::new();
    for (k, v) in field_entries(field) {
        map.insert(k.to_string(), v);
    }
    Value::Object(map)
}

pub fn value_to_field(v: &Value) -> Result<FieldSpec> {
    let obj = v
        .as_object()
        .ok_or_else(|| Error::Malformed("field must be an object".into()))?;
    let p = obj
        .get("characteristic")
        .and_then(Value::as_u64)
        .ok_or_else(|| Error::Malformed("missing characteristic".into()))?;
    let e = obj
        .get("extension_degree")
        .and_then(Value::as_u64)
        .ok_or_else(|| Error::Malformed("missing extension_degree".into()))? as usize;
    let modulus =
        match obj.get("modulus") {
            None | Some(Value::Null) => None,
            Some(m) => {
                let arr = m
                    .as_array()
                    .ok_or_else(|| Error::Malformed("modulus must be an array".into()))?;
                let mut coeffs = Vec::with_capacity(arr.len());
                for item in arr {
                    coeffs.push(item.as_u64().ok_or_else(|| {
                        Error::Malformed("modulus coefficients are integers".into())
                    })?);
                }
                Some(coeffs)
            }
        };
    if e == 1 && modulus.is_some() {
        return Err(Error::Malformed("modulus is absent iff e = 1".into()));
    }
    FieldSpec::new(p, e, modulus)
}

pub fn module_to_value(m: &SL2Module) -> Value {
    let mut map = Map::new();
    for (k, v) in field_entries(m.field()) {
        map.insert(k.to_string(), v);
    }
    map.insert("dimension".into(), json!(m.dim()));
    let gens: Vec<Value> = m
        .generators()
        .iter()
        .enumerate()
        .map(|(j, g)| {
            let mut gm = Map::new();
            gm.insert("basis_index".into(), json!(j));
            gm.insert("H".into(), matrix_to_value(&g.h));
            gm.insert("X".into(), matrix_to_value(&g.x));
            gm.insert("Y".into(), matrix_to_value(&g.y));
            Value::Object(gm)
        })
        .collect();
    map.insert("generators".into(), Value::Array(gens));
    Value::Object(map)
}

pub fn value_to_module(v: &Value) -> Result<SL2Module> {
    let field = value_to_field(v)?;
    let obj = v.as_object().unwrap();
    let dim = obj
        .get("dimension")
        .and_then(Value::as_u64)
        .ok_or_else(|| Error::Malformed("missing dimension".into()))? as usize;
    let gens_v = obj
        .get("generators")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Malformed("missing generators".into()))?;
    let e = field.extension_degree();
    if gens_v.len() != e {
        return Err(Error::Malformed(format!(
            "expected {e} generator triples, found {}",
            gens_v.len()
        )));
    }
    let p1 = field.prime_subfield();
    let mut slots: Vec<Option<GeneratorTriple>> = vec![None; e];
    for g in gens_v {
        let go = g
            .as_object()
            .ok_or_else(|| Error::Malformed("generator must be an object".into()))?;
        let j = go
            .get("basis_index")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::Malformed("missing basis_index".into()))?
            as usize;
        if j >= e || slots[j].is_some() {
            return Err(Error::Malformed(format!(
                "generators must cover basis indices 0..{e} exactly once"
            )));
        }
        let get = |name: &str| -> Result<Matrix> {
            let mv = go
                .get(name)
                .ok_or_else(|| Error::Malformed(format!("missing matrix {name}")))?;
            value_to_matrix(&p1, mv, dim, dim)
        };
        slots[j] = Some(GeneratorTriple {
            h: get("H")?,
            x: get("X")?,
            y: get("Y")?,
        });
    }
    let gens: Vec<GeneratorTriple> = slots.into_iter().map(Option::unwrap).collect();
    SL2Module::from_parts(field, gens)
}

pub fn write_module(path: &std::path::Path, m: &SL2Module) -> Result<()> {
    let text = serde_json::to_string_pretty(&module_to_value(m))
        .map_err(|e| Error::Malformed(e.to_string()))?;
    std::fs::write(path, text + "\n").map_err(|e| Error::Malformed(e.to_string()))
}

pub fn read_module(path: &std::path::Path) -> Result<SL2Module> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Malformed(format!("{}: {e}", path.display())))?;
    let v: Value =
        serde_json::from_str(&text).map_err(|e| Error::Malformed(format!("bad JSON: {e}")))?;
    value_to_module(&v)
}

/// A bare matrix file over a field, used for the link maps alpha and beta.
pub fn write_matrix_file(path: &std::path::Path, m: &Matrix) -> Result<()> {
    let mut map = Map::new();
    for (k, v) in field_entries(m.field()) {
        map.insert(k.to_string(), v);
    }
    map.insert("rows".into(), json!(m.rows()));
    map.insert("cols".into(), json!(m.cols()));
    map.insert("entries".into(), matrix_to_value(m));
    let text = serde_json::to_string_pretty(&Value::Object(map))
        .map_err(|e| Error::Malformed(e.to_string()))?;
    std::fs::write(path, text + "\n").map_err(|e| Error::Malformed(e.to_string()))
}

pub fn read_matrix_file(path: &std::path::Path) -> Result<Matrix> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Malformed(format!("{}: {e}", path.display())))?;
    let v: Value =
        serde_json::from_str(&text).map_err(|e| Error::Malformed(format!("bad JSON: {e}")))?;
    let field = value_to_field(&v)?;
    let obj = v.as_object().unwrap();
    let rows = obj
        .get("rows")
        .and_then(Value::as_u64)
        .ok_or_else(|| Error::Malformed("missing rows".into()))? as usize;
    let cols = obj
        .get("cols")
        .and_then(Value::as_u64)
        .ok_or_else(|| Error::Malformed("missing cols".into()))? as usize;
    let entries = obj
        .get("entries")
        .ok_or_else(|| Error::Malformed("missing entries".into()))?;
    value_to_matrix(&field, entries, rows, cols)
}

pub fn subspace_to_value(s: &Subspace) -> Value {
    json!({
        "ambient_dim": s.ambient_dim(),
        "dim": s.dim(),
        "basis": matrix_to_value(s.basis()),
    })
}

pub fn validation_to_value(r: &ValidationReport) -> Value {
    json!({
        "valid": r.is_valid(),
        "failures": r.failures.iter().map(|f| json!({
            "relation": f.relation,
            "i": f.i,
            "j": f.j,
        })).collect::<Vec<_>>(),
    })
}

/// One JSON line per identity instantiation.
pub fn identity_report_lines(r: &IdentityReport) -> Vec<String> {
    r.checks
        .iter()
        .map(|c| {
            json!({
                "identity": c.identity,
                "i": c.i,
                "j": c.j,
                "tuple": c.tuple,
                "pass": c.pass,
            })
            .to_string()
        })
        .collect()
}

fn multiplicities_to_value(m: &BTreeMap<usize, usize>) -> Value {
    Value::Array(m.iter().map(|(k, i)| json!([k, i])).collect::<Vec<_>>())
}

pub fn classification_to_value(r: &ClassificationReport) -> Value {
    json!({
        "ann_dim": r.ann_dim,
        "multiplicities": multiplicities_to_value(&r.multiplicities),
        "witness": matrix_to_value(&r.witness.matrix),
    })
}

pub fn sab_to_value(r: &SabReport) -> Value {
    json!({
        "n": r.n,
        "m": r.m,
        "p": r.p,
        "alpha": matrix_to_value(&r.alpha),
        "beta": matrix_to_value(&r.beta),
        "beta_alpha_charpoly": r.beta_alpha_charpoly.iter().map(scalar_to_value).collect::<Vec<_>>(),
        "simple": r.simple,
    })
}

pub fn scalar_action_to_value(field: &FieldSpec, a: &ScalarAction) -> Value {
    json!({
        "field": field_to_value(field),
        "dimension": a.matrices()[0].rows(),
        "matrices": a.matrices().iter().map(matrix_to_value).collect::<Vec<_>>(),
    })
}

pub fn series_to_value(field: &FieldSpec, r: &SeriesReport) -> Value {
    json!({
        "terms": r.terms.iter().map(subspace_to_value).collect::<Vec<_>>(),
        "quotients": r.steps.iter().map(|s| json!({
            "k": s.k,
            "k_dim": s.outcome.k_dim,
            "copies": s.outcome.copies,
            "scalar_action": scalar_action_to_value(field, &s.outcome.action),
            "witness": matrix_to_value(&s.outcome.classification.witness.matrix),
        })).collect::<Vec<_>>(),
    })
}

pub fn separation_to_value(field: &FieldSpec, s: &Separation) -> Value {
    json!({
        "annihilator": subspace_to_value(&s.ann),
        "g_dot_v": subspace_to_value(&s.g_v),
        "scalar_action": scalar_action_to_value(field, &s.action),
        "multiplicities": multiplicities_to_value(&s.multiplicities),
        "witness": matrix_to_value(&s.witness.matrix),
    })
}

pub fn verdict_to_value(v: &CoherenceVerdict) -> Value {
    json!({
        "length": v.length,
        "kappa": v.kappa,
        "iota": v.iota,
        "bound": v.bound,
        "bound_holds": v.holds(),
    })
}

pub fn module_map_to_value(m: &ModuleMap) -> Value {
    matrix_to_value(&m.matrix)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f9() -> FieldSpec {
        FieldSpec::new(3, 2, None).unwrap()
    }

    #[test]
    fn module_file_round_trip_extension_field() {
        let m = SL2Module::twisted_tensor(&f9(), &[0, 1]).unwrap();
        let v = module_to_value(&m);
        let back = value_to_module(&v).unwrap();
        assert_eq!(m, back);
        // byte-identical re-serialization
        assert_eq!(
            serde_json::to_string(&v).unwrap(),
            serde_json::to_string(&module_to_value(&back)).unwrap()
        );
    }

    #[test]
    fn module_file_round_trip_rationals() {
        let q = FieldSpec::rationals();
        let m = SL2Module::sym_power(2, &q).unwrap().scramble(3);
        let v = module_to_value(&m);
        let s = serde_json::to_string(&v).unwrap();
        // rational entries are fraction strings with positive denominator
        assert!(s.contains("/1\""));
        let back = value_to_module(&v).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn rejects_out_of_range_entries() {
        let f5 = FieldSpec::prime(5).unwrap();
        let v = json!([[7]]);
        assert!(value_to_matrix(&f5, &v, 1, 1).is_err());
        let ok = json!([[3]]);
        assert!(value_to_matrix(&f5, &ok, 1, 1).is_ok());
    }

    #[test]
    fn rejects_duplicate_basis_index() {
        let m = SL2Module::sym_power(1, &f9()).unwrap();
        let mut v = module_to_value(&m);
        let gens = v
            .as_object_mut()
            .unwrap()
            .get_mut("generators")
            .unwrap()
            .as_array_mut()
            .unwrap();
        gens[1]
            .as_object_mut()
            .unwrap()
            .insert("basis_index".into(), json!(0));
        assert!(matches!(value_to_module(&v), Err(Error::Malformed(_))));
    }

    #[test]
    fn field_value_round_trip() {
        for f in [
            FieldSpec::rationals(),
            FieldSpec::prime(7).unwrap(),
            FieldSpec::new(5, 2, None).unwrap(),
        ] {
            assert_eq!(value_to_field(&field_to_value(&f)).unwrap(), f);
        }
    }

    #[test]
    fn parses_fraction_variants() {
        let q = FieldSpec::rationals();
        for (text, expect) in [("-3/2", "-3/2"), ("4/2", "2/1"), ("5", "5/1")] {
            let s = value_to_scalar(&q, &json!(text)).unwrap();
            assert_eq!(s.to_string(), expect);
        }
        assert!(value_to_scalar(&q, &json!("1/0")).is_err());
    }
}
