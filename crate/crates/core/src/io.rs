//! JSON formats for points, measures, matrices, simple projections and
//! results.
//!
//! Numbers are read exactly: a JSON number is taken at its decimal value,
//! and strings such as `"7/3"` are accepted wherever a number is. Matrix
//! entries may be `"-inf"`. Exact values that a float cannot hold are
//! written back as strings.

use std::collections::BTreeMap;
use std::path::Path;

use serde_json::{json, Map, Value};

use crate::crossdim::CrossDimResult;
use crate::matrix::TropMatrix;
use crate::measure::{Coupling, DiscreteMeasure};
use crate::point::TropPoint;
use crate::scalar::{exact_rational, parse_rational, Scalar, Q};
use crate::simple::SimpleProjection;
use crate::trop::Trop;
use crate::{Error, Result};

fn bad(what: impl Into<String>) -> Error {
    Error::Input(what.into())
}

fn rational(v: &Value) -> Result<Q> {
    match v {
        Value::Number(n) => parse_rational(&n.to_string()),
        Value::String(s) => parse_rational(s),
        other => Err(bad(format!("expected a number, found {other}"))),
    }
}

pub fn number<T: Scalar>(v: &Value) -> Result<T> {
    let q = rational(v)?;
    let t = T::from_q(&q);
    if !t.to_f64().is_finite() {
        return Err(bad(format!("number {v} out of range")));
    }
    Ok(t)
}

fn entry<T: Scalar>(v: &Value) -> Result<Trop<T>> {
    match v {
        Value::String(s) if matches!(s.trim(), "-inf" | "-Infinity" | "-infinity") => Ok(Trop::NegInf),
        _ => number(v).map(Trop::Real),
    }
}

/// JSON number when the float value is exact, otherwise `"p/q"`.
pub fn scalar_json<T: Scalar>(v: &T) -> Value {
    let f = v.to_f64();
    if !T::EXACT {
        return json!(f);
    }
    let exact = parse_rational(&v.to_string()).ok();
    match exact {
        Some(q) if exact_rational(f).ok().as_ref() == Some(&q) => json!(f),
        _ => Value::String(v.to_string()),
    }
}

fn field<'a>(obj: &'a Value, key: &str) -> Result<&'a Value> {
    obj.get(key).ok_or_else(|| bad(format!("missing field '{key}'")))
}

fn usize_field(obj: &Value, key: &str) -> Result<usize> {
    field(obj, key)?
        .as_u64()
        .map(|v| v as usize)
        .ok_or_else(|| bad(format!("field '{key}' must be a nonnegative integer")))
}

fn array<'a>(v: &'a Value, what: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| bad(format!("'{what}' must be an array")))
}

pub fn parse_json(text: &str) -> Result<Value> {
    Ok(serde_json::from_str(text)?)
}

pub fn read_json(path: &Path) -> Result<Value> {
    parse_json(&std::fs::read_to_string(path)?)
}

fn point_list<T: Scalar>(obj: &Value) -> Result<(usize, Vec<TropPoint<T>>)> {
    let dim = usize_field(obj, "dim")?;
    let points = array(field(obj, "points")?, "points")?
        .iter()
        .enumerate()
        .map(|(k, row)| {
            let coords = array(row, "points")?
                .iter()
                .map(number::<T>)
                .collect::<Result<Vec<T>>>()?;
            if coords.len() != dim {
                return Err(bad(format!("point {} has {} coordinates, dim is {dim}", k + 1, coords.len())));
            }
            TropPoint::new(coords)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((dim, points))
}

/// `{"dim": n, "points": [[...], ...]}`.
pub fn points_from_json<T: Scalar>(obj: &Value) -> Result<Vec<TropPoint<T>>> {
    Ok(point_list(obj)?.1)
}

pub fn points_to_json<T: Scalar>(points: &[TropPoint<T>]) -> Value {
    json!({
        "dim": points.first().map_or(0, TropPoint::dim),
        "points": points.iter().map(point_json).collect::<Vec<_>>(),
    })
}

pub fn point_json<T: Scalar>(p: &TropPoint<T>) -> Value {
    Value::Array(p.coords().iter().map(scalar_json).collect())
}

/// `{"dim": n, "points": [...], "weights": [...]}`; uniform when weights
/// are absent.
pub fn measure_from_json<T: Scalar>(obj: &Value) -> Result<DiscreteMeasure<T>> {
    let (_, points) = point_list::<T>(obj)?;
    match obj.get("weights") {
        None | Some(Value::Null) => DiscreteMeasure::uniform(points),
        Some(w) => {
            let weights = array(w, "weights")?
                .iter()
                .map(number::<T>)
                .collect::<Result<Vec<T>>>()?;
            DiscreteMeasure::new(points, weights)
        }
    }
}

pub fn measure_to_json<T: Scalar>(m: &DiscreteMeasure<T>) -> Value {
    json!({
        "dim": m.dim(),
        "points": m.support().iter().map(point_json).collect::<Vec<_>>(),
        "weights": m.weights().iter().map(scalar_json).collect::<Vec<_>>(),
    })
}

/// `{"m": .., "n": .., "entries": [[number | "-inf", ...], ...]}`.
pub fn matrix_from_json<T: Scalar>(obj: &Value) -> Result<TropMatrix<T>> {
    let (m, n) = (usize_field(obj, "m")?, usize_field(obj, "n")?);
    let rows = array(field(obj, "entries")?, "entries")?;
    if rows.len() != m {
        return Err(bad(format!("{} rows, m is {m}", rows.len())));
    }
    let mut entries = Vec::with_capacity(m * n);
    for (i, row) in rows.iter().enumerate() {
        let row = array(row, "entries")?;
        if row.len() != n {
            return Err(bad(format!("row {} has {} entries, n is {n}", i + 1, row.len())));
        }
        for v in row {
            entries.push(entry::<T>(v)?);
        }
    }
    TropMatrix::new(m, n, entries)
}

pub fn matrix_to_json<T: Scalar>(mat: &TropMatrix<T>) -> Value {
    let entries: Vec<Value> = (0..mat.rows())
        .map(|i| {
            Value::Array(
                mat.row(i)
                    .iter()
                    .map(|e| match e {
                        Trop::NegInf => Value::String("-inf".into()),
                        Trop::Real(v) => scalar_json(v),
                    })
                    .collect(),
            )
        })
        .collect();
    json!({"m": mat.rows(), "n": mat.cols(), "entries": entries})
}

/// `{"m": .., "n": .., "J": {"1": [cols], ...}, "offsets": {"i,j": v}}`,
/// all indices 1-based.
pub fn simple_from_json<T: Scalar>(obj: &Value) -> Result<SimpleProjection<T>> {
    let (m, n) = (usize_field(obj, "m")?, usize_field(obj, "n")?);
    let blocks_obj = field(obj, "J")?
        .as_object()
        .ok_or_else(|| bad("'J' must be an object"))?;
    let mut blocks = vec![Vec::new(); m];
    for (key, cols) in blocks_obj {
        let i: usize = key.trim().parse().map_err(|_| bad(format!("bad row key '{key}'")))?;
        if i == 0 || i > m {
            return Err(bad(format!("row key {i} out of range 1..={m}")));
        }
        for c in array(cols, "J")? {
            let j = c.as_u64().ok_or_else(|| bad("column indices must be integers"))? as usize;
            if j == 0 || j > n {
                return Err(bad(format!("column {j} out of range 1..={n}")));
            }
            blocks[i - 1].push(j - 1);
        }
    }
    let mut offsets = BTreeMap::new();
    if let Some(offs) = obj.get("offsets") {
        let offs = offs.as_object().ok_or_else(|| bad("'offsets' must be an object"))?;
        for (key, v) in offs {
            let (i, j) = key
                .split_once(',')
                .and_then(|(a, b)| Some((a.trim().parse::<usize>().ok()?, b.trim().parse::<usize>().ok()?)))
                .ok_or_else(|| bad(format!("bad offset key '{key}'")))?;
            if i == 0 || j == 0 || i > m || j > n || !blocks[i - 1].contains(&(j - 1)) {
                return Err(bad(format!("offset key '{key}' is not an entry of the projection")));
            }
            offsets.insert((i - 1, j - 1), number::<T>(v)?);
        }
    }
    SimpleProjection::from_blocks(n, &blocks, &offsets)
}

pub fn simple_to_json<T: Scalar>(p: &SimpleProjection<T>) -> Value {
    let mut blocks = Map::new();
    let mut offsets = Map::new();
    for (i, block) in p.blocks().iter().enumerate() {
        blocks.insert((i + 1).to_string(), json!(block.iter().map(|j| j + 1).collect::<Vec<_>>()));
        for &j in block {
            offsets.insert(format!("{},{}", i + 1, j + 1), scalar_json(&p.offsets()[j]));
        }
    }
    json!({"m": p.rows(), "n": p.cols(), "J": blocks, "offsets": offsets})
}

pub fn coupling_to_json<T: Scalar>(c: &Coupling<T>) -> Value {
    Value::Array(
        c.mass
            .iter()
            .map(|row| Value::Array(row.iter().map(scalar_json).collect()))
            .collect(),
    )
}

/// Result of a cross-dimensional run.
pub fn result_to_json(r: &CrossDimResult, p: f64, seed: u64) -> Value {
    let cert = r.certificate.as_ref();
    json!({
        "w_minus": r.w_minus,
        "w_plus": cert.map(|c| c.w_plus),
        "projection": simple_to_json(&r.projection),
        "certificate_gap": cert.map(|c| c.gap),
        "pushforward_matches": cert.map(|c| c.pushforward_matches),
        "structures_explored": r.structures_explored,
        "exhaustive": r.exhaustive,
        "budget_exhausted": r.budget_exhausted,
        "tolerance": r.tolerance,
        "p": p,
        "seed": seed,
        "beta": measure_to_json(&r.beta),
        "coupling": coupling_to_json(&r.coupling),
        "alpha": cert.map(|c| measure_to_json(&c.alpha)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_round_trip_with_neg_inf() {
        let v = parse_json(r#"{"m":2,"n":3,"entries":[[0,"-inf","1/2"],[0.25,2,-3]]}"#).unwrap();
        let mat: TropMatrix<Q> = matrix_from_json(&v).unwrap();
        assert_eq!(mat.get(0, 1), &Trop::NegInf);
        assert_eq!(mat.real(0, 2).unwrap(), &Q::new(1.into(), 2.into()));
        let back: TropMatrix<Q> = matrix_from_json(&matrix_to_json(&mat)).unwrap();
        assert_eq!(back, mat);
    }

    #[test]
    fn decimal_numbers_are_exact() {
        let v: Q = number(&json!(0.1)).unwrap();
        assert_eq!(v, Q::new(1.into(), 10.into()));
        assert_eq!(scalar_json(&v), json!("1/10"));
        assert_eq!(scalar_json(&Q::new(3.into(), 4.into())), json!(0.75));
    }

    #[test]
    fn shape_errors() {
        let v = parse_json(r#"{"m":2,"n":2,"entries":[[0,1]]}"#).unwrap();
        assert!(matrix_from_json::<f64>(&v).is_err());
        let v = parse_json(r#"{"dim":3,"points":[[0,1]]}"#).unwrap();
        assert!(points_from_json::<f64>(&v).is_err());
        let v = parse_json(r#"{"dim":2,"points":[[0,1]],"weights":[-1]}"#).unwrap();
        assert!(measure_from_json::<f64>(&v).is_err());
    }

    #[test]
    fn measure_defaults_to_uniform() {
        let v = parse_json(r#"{"dim":2,"points":[[0,1],[0,2]]}"#).unwrap();
        let m: DiscreteMeasure<f64> = measure_from_json(&v).unwrap();
        assert_eq!(m.weights(), &[0.5, 0.5]);
        let back: DiscreteMeasure<f64> = measure_from_json(&measure_to_json(&m)).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn simple_projection_round_trip() {
        let v = parse_json(r#"{"m":2,"n":4,"J":{"1":[1,3],"2":[2]},"offsets":{"1,1":0,"1,3":-2,"2,2":1.5}}"#).unwrap();
        let p: SimpleProjection<Q> = simple_from_json(&v).unwrap();
        assert_eq!(p.owner(3), None);
        assert_eq!(p.owner(2), Some(0));
        let back: SimpleProjection<Q> = simple_from_json(&simple_to_json(&p)).unwrap();
        assert_eq!(back, p);
        let bad = parse_json(r#"{"m":2,"n":3,"J":{"1":[1],"2":[1]}}"#).unwrap();
        assert!(simple_from_json::<f64>(&bad).is_err());
    }
}
