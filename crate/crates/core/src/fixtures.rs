//! Published reference data for the 12-input demonstrator, shipped as CSV.
//!
//! Values are stored exactly as printed, including their rounding. Each
//! table is addressed by its id (`table1` .. `table7`); the two offset
//! tables share one file.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::mapper::{AcnConfig, Synapse, TreeAux};
use crate::model::{InputVector, NeuronSpec, TechProfile, Tree};
use crate::tl::OffsetTable;

pub const TABLE_IDS: [&str; 7] = ["table1", "table2", "table3", "table4", "table5", "table6", "table7"];

const FILES: [(&str, &str); 7] = [
    ("tl_offsets.csv", include_str!("../fixtures/tl_offsets.csv")),
    ("table3.csv", include_str!("../fixtures/table3.csv")),
    ("table4.csv", include_str!("../fixtures/table4.csv")),
    ("table5.csv", include_str!("../fixtures/table5.csv")),
    ("table6.csv", include_str!("../fixtures/table6.csv")),
    ("table7.csv", include_str!("../fixtures/table7.csv")),
    ("reference_values.csv", include_str!("../fixtures/reference_values.csv")),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Table3Kind {
    Synapse,
    Bias,
    Ballast,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct Table3Row {
    pub kind: Table3Kind,
    pub tree: Tree,
    pub index: Option<usize>,
    pub weight: Option<f64>,
    #[serde(rename = "cap_fF")]
    pub cap_ff: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct Table4Row {
    pub tv: String,
    pub vector: InputVector,
    #[serde(rename = "vm_p_mV")]
    pub vm_pos_mv: f64,
    #[serde(rename = "vm_m_mV")]
    pub vm_neg_mv: f64,
    #[serde(rename = "vmd_mV")]
    pub vmd_mv: f64,
    #[serde(deserialize_with = "bit")]
    pub out_model: bool,
    #[serde(rename = "prop_vm_p_mV")]
    pub proposed_vm_pos_mv: f64,
    #[serde(rename = "prop_vm_m_mV")]
    pub proposed_vm_neg_mv: f64,
    #[serde(deserialize_with = "bit")]
    pub out_proposed: bool,
    #[serde(rename = "conv_vm_p_mV")]
    pub conventional_vm_pos_mv: f64,
    #[serde(rename = "conv_vm_m_mV")]
    pub conventional_vm_neg_mv: f64,
    #[serde(deserialize_with = "bit")]
    pub out_conventional: bool,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct Table5Row {
    pub tv: String,
    pub vector: InputVector,
    #[serde(rename = "CL_fF")]
    pub load_ff: f64,
    #[serde(rename = "E_ACN_fJ")]
    pub acn_fj: f64,
    #[serde(rename = "E_CCN_fJ")]
    pub ccn_fj: f64,
    pub savings_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct Table6Row {
    #[serde(rename = "nominal_MHz")]
    pub nominal_mhz: f64,
    #[serde(rename = "operating_MHz")]
    pub operating_mhz: f64,
    pub t_on_ns: f64,
    #[serde(rename = "L_pc_mH")]
    pub l_pc_mh: f64,
}

/// Savings in percent at one supply for three test vectors.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct Table7Row {
    #[serde(rename = "vdd_V")]
    pub vdd: f64,
    #[serde(rename = "TV4")]
    pub tv4: f64,
    #[serde(rename = "TV8")]
    pub tv8: f64,
    #[serde(rename = "TV13")]
    pub tv13: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct ReferenceValue {
    pub key: String,
    pub value: f64,
    pub unit: String,
    pub table: String,
}

fn bit<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<bool, D::Error> {
    match u8::deserialize(d)? {
        0 => Ok(false),
        1 => Ok(true),
        v => Err(serde::de::Error::custom(format!("expected 0 or 1, got {v}"))),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixtureSet {
    pub offsets: OffsetTable,
    pub table3: Vec<Table3Row>,
    pub table4: Vec<Table4Row>,
    pub table5: Vec<Table5Row>,
    pub table6: Vec<Table6Row>,
    pub table7: Vec<Table7Row>,
    pub reference: BTreeMap<String, ReferenceValue>,
}

fn rows<T: DeserializeOwned>(table: &str, text: &str) -> Result<Vec<T>> {
    csv::Reader::from_reader(text.as_bytes())
        .deserialize()
        .collect::<std::result::Result<Vec<T>, _>>()
        .map_err(|e| Error::fixture(table, e.to_string()))
}

impl FixtureSet {
    pub fn embedded() -> Self {
        let files: BTreeMap<&str, String> = FILES.iter().map(|(n, t)| (*n, t.to_string())).collect();
        Self::parse(&files).expect("embedded fixtures are well formed")
    }

    /// Reads the same file names from `dir`.
    pub fn load_dir(dir: &Path) -> Result<Self> {
        let mut files = BTreeMap::new();
        for (name, _) in FILES {
            let path = dir.join(name);
            let text = fs::read_to_string(&path).map_err(|source| Error::Io { path, source })?;
            files.insert(name, text);
        }
        Self::parse(&files)
    }

    /// Embedded file contents by name, for exporting.
    pub fn embedded_files() -> &'static [(&'static str, &'static str)] {
        &FILES
    }

    fn parse(files: &BTreeMap<&str, String>) -> Result<Self> {
        let offsets = OffsetTable::from_csv(files["tl_offsets.csv"].as_bytes())
            .map_err(|e| Error::fixture("table1", e.to_string()))?;
        let reference = rows::<ReferenceValue>("reference", &files["reference_values.csv"])?
            .into_iter()
            .map(|r| (r.key.clone(), r))
            .collect();
        let set = FixtureSet {
            offsets,
            table3: rows("table3", &files["table3.csv"])?,
            table4: rows("table4", &files["table4.csv"])?,
            table5: rows("table5", &files["table5.csv"])?,
            table6: rows("table6", &files["table6.csv"])?,
            table7: rows("table7", &files["table7.csv"])?,
            reference,
        };
        set.check()?;
        Ok(set)
    }

    fn check(&self) -> Result<()> {
        let n = self.table3.iter().filter(|r| r.kind == Table3Kind::Synapse).count();
        if n == 0 {
            return Err(Error::fixture("table3", "no synapse rows"));
        }
        for r in &self.table3 {
            if r.kind == Table3Kind::Synapse && (r.index.is_none() || r.weight.is_none()) {
                return Err(Error::fixture("table3", "synapse rows need an index and a weight"));
            }
        }
        for (id, vectors) in [
            ("table4", self.table4.iter().map(|r| &r.vector).collect::<Vec<_>>()),
            ("table5", self.table5.iter().map(|r| &r.vector).collect()),
        ] {
            if let Some(v) = vectors.iter().find(|v| v.len() != n) {
                return Err(Error::fixture(id, format!("vector {v} does not have {n} inputs")));
            }
        }
        Ok(())
    }

    pub fn reference_value(&self, key: &str) -> Result<f64> {
        self.reference
            .get(key)
            .map(|r| r.value)
            .ok_or_else(|| Error::fixture("reference", format!("missing key `{key}`")))
    }

    /// The published neuron: weights from the configuration table and its bias.
    pub fn neuron(&self) -> Result<NeuronSpec> {
        let mut syn: Vec<(usize, f64)> = self
            .table3
            .iter()
            .filter(|r| r.kind == Table3Kind::Synapse)
            .map(|r| (r.index.unwrap_or_default(), r.weight.unwrap_or_default()))
            .collect();
        syn.sort_by_key(|s| s.0);
        if syn.iter().enumerate().any(|(i, s)| s.0 != i) {
            return Err(Error::fixture("table3", "synapse indices are not 0..N"));
        }
        NeuronSpec::new(syn.into_iter().map(|s| s.1).collect(), self.reference_value("tau")?)
    }

    /// Technology used for the published mapping: no parasitic, 1 fF grid.
    pub fn tech(&self) -> Result<TechProfile> {
        let v_max = self.reference_value("v_max")?;
        Ok(TechProfile {
            vdd: v_max,
            v_max,
            v_cut: self.reference_value("v_cut")?,
            c_min_ff: self.reference_value("c_min")?,
            ..TechProfile::reference()
        })
    }

    /// The published physical configuration, capacitors verbatim.
    pub fn config(&self) -> Result<AcnConfig> {
        let neuron = self.neuron()?;
        let v_bias = self.reference_value("v_bias")?;
        let mut positive = TreeAux {
            bias_ff: 0.0,
            ballast_ff: 0.0,
            bias_voltage: v_bias,
        };
        let mut negative = positive;
        let mut synapses = Vec::new();
        for r in &self.table3 {
            let aux = match r.tree {
                Tree::Positive => &mut positive,
                Tree::Negative => &mut negative,
            };
            match r.kind {
                Table3Kind::Synapse => synapses.push(Synapse {
                    index: r.index.unwrap_or_default(),
                    tree: r.tree,
                    cap_ff: r.cap_ff,
                }),
                Table3Kind::Bias => aux.bias_ff = r.cap_ff,
                Table3Kind::Ballast => aux.ballast_ff = r.cap_ff,
            }
        }
        let unit = self.reference_value("ct_total")? / neuron.weight_sum();
        AcnConfig::new(neuron.len(), synapses, positive, negative, 0.0, unit)?.with_neuron(neuron)
    }

    pub fn table4_row(&self, tv: &str) -> Option<&Table4Row> {
        self.table4.iter().find(|r| r.tv == tv)
    }

    pub fn table5_row(&self, tv: &str) -> Option<&Table5Row> {
        self.table5.iter().find(|r| r.tv == tv)
    }

    pub fn vectors(&self) -> Vec<(String, InputVector)> {
        self.table4.iter().map(|r| (r.tv.clone(), r.vector.clone())).collect()
    }
}
