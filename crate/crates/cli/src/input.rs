//! Reading programs, partial functions and numeric ranges from the command line.

use std::fs;
use std::path::Path;

use subt_core::machine::{decode, Program};
use subt_core::pairing::Nat;
use subt_core::partialfn::PartialFn;
use subt_core::Error;

fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))
}

/// A program file holds either the text format or a JSON `Program`.
pub fn program_file(path: &Path) -> Result<Program, Error> {
    let text = read(path)?;
    if text.trim_start().starts_with('{') {
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
    } else {
        Program::parse(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
    }
}

pub fn program(path: Option<&Path>, index: Option<Nat>) -> Result<Program, Error> {
    match (path, index) {
        (Some(p), None) => program_file(p),
        (None, Some(i)) => Ok(decode(i)),
        _ => Err(Error::InvalidArgument("give exactly one of --program and --index".into())),
    }
}

/// A partial function file holds `PartialFn` JSON.
pub fn partial_fn(path: &Path) -> Result<PartialFn, Error> {
    let text = read(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

/// `a..b` (half open) or a comma-separated list.
pub fn nat_list(spec: &str) -> Result<Vec<Nat>, Error> {
    let bad = |what: &str| Error::Parse(format!("bad {what} in `{spec}`"));
    let num = |s: &str| s.trim().parse::<Nat>().map_err(|_| bad("number"));
    let spec = spec.trim();
    if spec.is_empty() {
        return Ok(Vec::new());
    }
    if let Some((lo, hi)) = spec.split_once("..") {
        let (lo, hi) = (num(lo)?, num(hi)?);
        if lo > hi {
            return Err(bad("range"));
        }
        return Ok((lo..hi).collect());
    }
    let mut out: Vec<Nat> = spec.split(',').map(num).collect::<Result<_, _>>()?;
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lists_and_ranges() {
        assert_eq!(nat_list("2..5").unwrap(), vec![2, 3, 4]);
        assert_eq!(nat_list("7, 1,7").unwrap(), vec![1, 7]);
        assert!(nat_list("").unwrap().is_empty());
        assert!(nat_list("5..2").is_err());
        assert!(nat_list("x").is_err());
    }
}
