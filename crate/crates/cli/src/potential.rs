//! Potential specs of the form `name[:key=value,...]`.

use liftlab::Potential;

/// Names accepted by [`parse_potential`].
pub const KNOWN_POTENTIALS: [&str; 2] = ["gaussian", "double-well"];

fn known() -> String {
    format!("known potentials: {} (alias quadratic for gaussian)", KNOWN_POTENTIALS.join(", "))
}

/// `gaussian[:m=1,dim=1]` or `double-well[:beta=0.5]`.
pub fn parse_potential(spec: &str) -> Result<Potential, String> {
    let (name, args) = spec.split_once(':').unwrap_or((spec, ""));
    let mut params = Vec::new();
    for item in args.split(',').filter(|s| !s.trim().is_empty()) {
        let (k, v) = item.split_once('=').ok_or_else(|| format!("parameter '{item}' in '{spec}' is not key=value"))?;
        let v: f64 = v.trim().parse().map_err(|_| format!("parameter {k} = '{v}' is not a number"))?;
        params.push((k.trim().to_string(), v));
    }
    let take = |allowed: &[&str]| -> Result<Vec<Option<f64>>, String> {
        if let Some((k, _)) = params.iter().find(|(k, _)| !allowed.contains(&k.as_str())) {
            return Err(format!("unknown parameter '{k}' for {name}; expected {}", allowed.join(", ")));
        }
        Ok(allowed.iter().map(|a| params.iter().rev().find(|(k, _)| k == a).map(|(_, v)| *v)).collect())
    };
    match name.trim() {
        "gaussian" | "quadratic" => {
            let p = take(&["m", "dim"])?;
            let dim = p[1].unwrap_or(1.0);
            if dim < 1.0 || dim.fract() != 0.0 {
                return Err(format!("dim must be a positive integer, got {dim}"));
            }
            Potential::quadratic(p[0].unwrap_or(1.0), dim as usize).map_err(|e| e.to_string())
        }
        "double-well" | "double_well" => {
            let p = take(&["beta"])?;
            Potential::double_well(p[0].unwrap_or(0.5)).map_err(|e| e.to_string())
        }
        other => Err(format!("unknown potential '{other}'; {}", known())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn specs() {
        assert_eq!(parse_potential("gaussian").unwrap().quadratic_mass(), Some(1.0));
        let p = parse_potential("quadratic:m=2,dim=3").unwrap();
        assert_eq!((p.quadratic_mass(), p.dim()), (Some(2.0), 3));
        assert_eq!(parse_potential("double-well:beta=2").unwrap().kappa_minus(), 8.0);
        assert!(parse_potential("double-well:gamma=2").is_err());
        assert!(parse_potential("gaussian:m=-1").is_err());
        assert!(parse_potential("gaussian:dim=1.5").is_err());
        let e = parse_potential("banana").unwrap_err();
        assert!(e.contains("gaussian") && e.contains("double-well"));
    }
}
