use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::client::LinkDataClient;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct Expansion {
    /// Candidate domain to the schemes that link to it, in scheme order.
    pub candidates: BTreeMap<String, Vec<String>>,
    /// Schemes without any outlink data.
    pub skipped: Vec<String>,
}

/// Union of each scheme's top `per_scheme` outlink targets, minus `exclude`.
///
/// Targets are ranked by links with ties broken by name. Excluded domains
/// still occupy a slot in a scheme's ranking.
pub fn expand_outlinks(
    schemes: &[String],
    client: &dyn LinkDataClient,
    per_scheme: usize,
    exclude: &BTreeSet<String>,
) -> Result<Expansion> {
    let scheme_set: BTreeSet<&String> = schemes.iter().collect();
    let mut out = Expansion::default();
    for scheme in schemes {
        let mut records = client.get_outlinks(scheme, per_scheme)?;
        if records.is_empty() {
            out.skipped.push(scheme.clone());
            continue;
        }
        records.sort_by(|a, b| b.links.cmp(&a.links).then_with(|| a.target.cmp(&b.target)));
        for r in records.into_iter().take(per_scheme) {
            if exclude.contains(&r.target) || scheme_set.contains(&r.target) {
                continue;
            }
            let prov = out.candidates.entry(r.target).or_default();
            if !prov.contains(scheme) {
                prov.push(scheme.clone());
            }
        }
    }
    Ok(out)
}
