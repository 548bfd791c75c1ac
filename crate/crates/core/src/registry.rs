//! Built-in code and relocation-map fixtures.
//!
//! The fixtures live as JSON data files under `data/` (embedded at compile
//! time) rather than as constants in code: they are the ground truth behind
//! every exact-count test, so keeping them in one auditable place limits the
//! blast radius of a transcription error. Every fixture is validated on
//! first access and a dedicated test pins the files' checksums.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::code::{MdMappingSet, ScCodeSpec};
use crate::error::{Error, Result};

const CODES_JSON: &str = include_str!("../data/codes.json");
const MAPS_JSON: &str = include_str!("../data/maps.json");

/// A named SC code family. `spec.l` is the default coupling length; the
/// family is also used at the lengths in `alt_l`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CodeFixture {
    pub name: String,
    pub description: String,
    #[serde(rename = "alt_L")]
    pub alt_l: Vec<usize>,
    pub spec: ScCodeSpec,
}

/// A named uniform relocation map tied to a constituent code family.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MapFixture {
    pub name: String,
    pub description: String,
    /// Name of the constituent [`CodeFixture`] (at its default length).
    pub constituent: String,
    #[serde(rename = "L2")]
    pub l2: usize,
    pub d: usize,
    /// The shared per-chain map (γ×κ).
    pub map: Vec<Vec<u8>>,
}

impl MapFixture {
    /// Expands the shared map into the full mapping set.
    pub fn mapping_set(&self) -> MdMappingSet {
        MdMappingSet::uniform(self.map.clone(), self.l2, self.d)
    }
}

#[derive(Debug)]
pub struct CodeRegistry {
    pub codes: Vec<CodeFixture>,
    pub maps: Vec<MapFixture>,
}

impl CodeRegistry {
    /// The embedded fixtures, validated once on first access.
    ///
    /// Panics if the embedded data files are corrupt — that is a build
    /// defect, not a runtime condition.
    pub fn builtin() -> &'static CodeRegistry {
        static REGISTRY: OnceLock<CodeRegistry> = OnceLock::new();
        REGISTRY.get_or_init(|| CodeRegistry::from_embedded().expect("embedded fixtures invalid"))
    }

    fn from_embedded() -> Result<CodeRegistry> {
        let codes: Vec<CodeFixture> = serde_json::from_str(CODES_JSON)?;
        let maps: Vec<MapFixture> = serde_json::from_str(MAPS_JSON)?;
        let registry = CodeRegistry { codes, maps };
        registry.validate()?;
        Ok(registry)
    }

    /// Structural validation of every fixture; run at load and by tests.
    pub fn validate(&self) -> Result<()> {
        for code in &self.codes {
            code.spec.validate()?;
            for &l in &code.alt_l {
                let mut alt = code.spec.clone();
                alt.l = l;
                alt.validate()?;
            }
        }
        for map in &self.maps {
            let constituent = self.code(&map.constituent)?;
            map.mapping_set().validate(constituent.spec.block.gamma, constituent.spec.block.kappa)?;
        }
        Ok(())
    }

    pub fn code(&self, name: &str) -> Result<&CodeFixture> {
        self.codes
            .iter()
            .find(|c| c.name == name)
            .ok_or_else(|| Error::invalid(format!("unknown code fixture `{name}`")))
    }

    /// Resolves a code by name, optionally overriding the coupling length.
    pub fn code_spec(&self, name: &str, l: Option<usize>) -> Result<ScCodeSpec> {
        let mut spec = self.code(name)?.spec.clone();
        if let Some(l) = l {
            spec.l = l;
            spec.validate()?;
        }
        Ok(spec)
    }

    pub fn map(&self, name: &str) -> Result<&MapFixture> {
        self.maps
            .iter()
            .find(|m| m.name == name)
            .ok_or_else(|| Error::invalid(format!("unknown map fixture `{name}`")))
    }

    /// The constituent spec a map fixture couples (default length).
    pub fn map_constituent(&self, map: &MapFixture) -> Result<ScCodeSpec> {
        self.code_spec(&map.constituent, None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use sha2::{Digest, Sha256};

    #[test]
    fn fixtures_validate_and_resolve() {
        let reg = CodeRegistry::builtin();
        reg.validate().unwrap();
        assert!(reg.codes.len() >= 3);
        assert_eq!(reg.maps.len(), 7);
        for map in &reg.maps {
            let spec = reg.map_constituent(map).unwrap();
            spec.assemble_md(&map.mapping_set()).unwrap();
        }
        assert!(reg.code("nope").is_err());
        assert!(reg.map("nope").is_err());
    }

    #[test]
    fn fixture_lengths_and_rates() {
        let reg = CodeRegistry::builtin();
        let cases = [
            ("sc1", None, 2890, 0.74),
            ("sc1", Some(30), 8670, 0.76),
            ("sc1", Some(50), 14450, 0.76),
            ("sc4", None, 4370, 0.81),
            ("sc4", Some(40), 17480, 0.83),
            ("sc6", None, 4335, 0.81),
        ];
        for (name, l, n, rate) in cases {
            let spec = reg.code_spec(name, l).unwrap();
            assert_eq!(spec.n(), n, "{name} L={l:?}");
            assert!((spec.design_rate() - rate).abs() < 0.005, "{name} rate {}", spec.design_rate());
        }
        // Exact value behind the rounded 0.74.
        let sc1 = reg.code_spec("sc1", None).unwrap();
        assert!((sc1.design_rate() - (1.0 - 44.0 / 170.0)).abs() < 1e-12);
    }

    #[test]
    fn md_fixture_shapes() {
        let reg = CodeRegistry::builtin();
        let expect = [
            ("m2", "sc1", 3, 3, 23),
            ("m3", "sc1", 5, 5, 23),
            ("m4", "sc4", 4, 2, 19),
            ("m5", "sc4", 4, 3, 19),
            ("m6", "sc4", 4, 4, 19),
            ("m7", "sc6", 3, 2, 9),
            ("m8", "sc6", 3, 3, 9),
        ];
        for (name, constituent, l2, d, t) in expect {
            let m = reg.map(name).unwrap();
            assert_eq!(m.constituent, constituent);
            assert_eq!((m.l2, m.d), (l2, d));
            let nonzero: usize = m.map.iter().flatten().filter(|&&v| v != 0).count();
            assert_eq!(nonzero, t, "{name} density");
            // Depth is declared, not inferred from the max entry: m2 declares
            // d=3 and uses entries up to 2 only.
            let max = *m.map.iter().flatten().max().unwrap() as usize;
            assert!(max < d);
        }
        // MD lengths: m3 couples 5 chains of sc1 (5×2890), m4 couples 4
        // chains of sc4 (4×4370).
        let m3 = reg.map("m3").unwrap();
        let sc1 = reg.map_constituent(m3).unwrap();
        assert_eq!(sc1.n() * m3.l2, 14450);
        let m4 = reg.map("m4").unwrap();
        let sc4 = reg.map_constituent(m4).unwrap();
        assert_eq!(sc4.n() * m4.l2, 17480);
        assert!((sc4.design_rate() - 0.81).abs() < 0.005);
    }

    /// The data files are the transcription of record; any edit must be
    /// deliberate and reviewed, so their digests are pinned here.
    #[test]
    fn fixture_files_checksums() {
        let digest = |text: &str| {
            let mut h = Sha256::new();
            h.update(text.as_bytes());
            h.finalize().iter().map(|b| format!("{b:02x}")).collect::<String>()
        };
        assert_eq!(
            digest(super::CODES_JSON),
            "d4d060d06bfb7cc844da83542c0af277fb729a408a43ea3e6e79c39b568574a2"
        );
        assert_eq!(
            digest(super::MAPS_JSON),
            "29aab04f8bbb2ad5939cee977e2d71e1e7a0d928146737595a266054acb62665"
        );
    }
}
