//! Plain-text model files.
//!
//! ```text
//! medmarket-nar 1
//! delays 5
//! hidden 16
//! restarts 20
//! base_seed 7
//! max_epochs 200
//! target_error 0.0001
//! parallel true
//! optimizer {"kind":"levenberg-marquardt",...}
//! unit millions-of-persons
//! norm_min 987.05
//! norm_max 1340.91
//! w_in <hidden*delays values, row per hidden unit>
//! b_hidden <hidden values>
//! w_out <hidden values>
//! b_out <value>
//! ```
//!
//! Numbers use the shortest decimal form that parses back to the same `f64`.

use std::collections::HashMap;

use super::{NarConfig, NarModel, Network, Normalization, Optimizer};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::series::Unit;

pub const FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "medmarket-nar";

fn join<T: Scalar>(values: &[T]) -> String {
    values
        .iter()
        .map(|v| format!("{:?}", v.as_f64()))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn save_model<T: Scalar>(model: &NarModel<T>) -> String {
    let c = &model.config;
    let net = &model.network;
    let mut out = String::new();
    let mut line = |k: &str, v: String| {
        out.push_str(k);
        out.push(' ');
        out.push_str(&v);
        out.push('\n');
    };
    line(MAGIC, FORMAT_VERSION.to_string());
    line("delays", net.delays.to_string());
    line("hidden", net.hidden.to_string());
    line("restarts", c.restarts.to_string());
    line("base_seed", c.base_seed.to_string());
    line("max_epochs", c.max_epochs.to_string());
    line("target_error", format!("{:?}", c.target_error));
    line("parallel", c.parallel.to_string());
    line(
        "optimizer",
        serde_json::to_string(&c.optimizer).expect("optimizer serializes"),
    );
    line("unit", model.unit.to_string());
    line("norm_min", format!("{:?}", model.norm.min.as_f64()));
    line("norm_max", format!("{:?}", model.norm.max.as_f64()));
    line("w_in", join(&net.w_in));
    line("b_hidden", join(&net.b_hidden));
    line("w_out", join(&net.w_out));
    line("b_out", format!("{:?}", net.b_out.as_f64()));
    out
}

fn bad(msg: impl Into<String>) -> Error {
    Error::ModelFormat(msg.into())
}

pub fn load_model<T: Scalar>(text: &str) -> Result<NarModel<T>> {
    let mut fields: HashMap<&str, &str> = HashMap::new();
    let mut lines = text.lines();
    let first = lines.next().ok_or_else(|| bad("empty file"))?;
    match first.split_once(' ') {
        Some((MAGIC, v)) if v.trim() == FORMAT_VERSION.to_string() => {}
        Some((MAGIC, v)) => return Err(bad(format!("unsupported format version {v}"))),
        _ => return Err(bad("missing medmarket-nar header")),
    }
    for l in lines.filter(|l| !l.trim().is_empty()) {
        let (k, v) = l.split_once(' ').unwrap_or((l, ""));
        if fields.insert(k, v).is_some() {
            return Err(bad(format!("duplicate key '{k}'")));
        }
    }
    let get = |k: &str| {
        fields
            .get(k)
            .copied()
            .ok_or_else(|| bad(format!("missing '{k}'")))
    };
    fn num<V: std::str::FromStr>(k: &str, s: &str) -> Result<V> {
        s.trim()
            .parse()
            .map_err(|_| bad(format!("bad value for '{k}': {s}")))
    }
    let reals = |k: &str, n: usize| -> Result<Vec<T>> {
        let v: Vec<T> = get(k)?
            .split_whitespace()
            .map(|s| num::<f64>(k, s).map(T::lit))
            .collect::<Result<_>>()?;
        if v.len() != n {
            return Err(bad(format!("'{k}' has {} values, expected {n}", v.len())));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(bad(format!("'{k}' has non-finite values")));
        }
        Ok(v)
    };

    let delays: usize = num("delays", get("delays")?)?;
    let hidden: usize = num("hidden", get("hidden")?)?;
    if delays == 0 || hidden == 0 {
        return Err(bad("delays and hidden must be positive"));
    }
    let optimizer: Optimizer =
        serde_json::from_str(get("optimizer")?).map_err(|e| bad(format!("optimizer: {e}")))?;
    let config = NarConfig {
        delays,
        hidden,
        restarts: num("restarts", get("restarts")?)?,
        base_seed: num("base_seed", get("base_seed")?)?,
        max_epochs: num("max_epochs", get("max_epochs")?)?,
        target_error: num("target_error", get("target_error")?)?,
        optimizer,
        parallel: num("parallel", get("parallel")?)?,
    };
    config.validate()?;
    let unit: Unit = get("unit")?.trim().parse()?;
    let norm = Normalization {
        min: reals("norm_min", 1)?[0],
        max: reals("norm_max", 1)?[0],
    };
    if !(norm.min < norm.max) {
        return Err(bad("norm_min must be below norm_max"));
    }
    let network = Network {
        delays,
        hidden,
        w_in: reals("w_in", hidden * delays)?,
        b_hidden: reals("b_hidden", hidden)?,
        w_out: reals("w_out", hidden)?,
        b_out: reals("b_out", 1)?[0],
    };
    Ok(NarModel {
        config,
        network,
        norm,
        unit,
    })
}
