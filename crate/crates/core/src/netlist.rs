//! Behavioral SPICE-style netlist of a configuration.
//!
//! Nodes: `pc` is the power clock, `vmP`/`vmN` the membrane nodes, `s<i>`
//! the common terminal of input `i`'s SPDT switch and `x<i>` its control.
//! Switch controls are driven from `.param x<i>` so one netlist serves
//! every input vector.

use std::fmt::Write;

use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::mapper::AcnConfig;
use crate::model::Tree;
use crate::tree::{operating_frequency, PowerClock};

fn node(tree: Tree) -> &'static str {
    match tree {
        Tree::Positive => "vmP",
        Tree::Negative => "vmN",
    }
}

/// Hex SHA-256 of the configuration and clock as canonical JSON.
pub fn config_hash(config: &AcnConfig, pc: &PowerClock) -> Result<String> {
    let mut h = Sha256::new();
    h.update(serde_json::to_vec(config)?);
    h.update(serde_json::to_vec(pc)?);
    Ok(h.finalize().iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    }))
}

pub fn export_netlist(config: &AcnConfig, pc: &PowerClock) -> Result<String> {
    config.validate()?;
    pc.validate()?;
    let f_op = operating_frequency(pc, 0.0);
    let mut out = String::new();
    let w = &mut out;
    // writing to a String cannot fail
    let _ = writeln!(w, "* dtsc behavioral neuron netlist");
    let _ = writeln!(w, "* hash sha256:{}", config_hash(config, pc)?);
    let _ = writeln!(
        w,
        "* inputs {} synapses {} CA+ {}f CA- {}f",
        config.n_inputs,
        config.synapses.len(),
        config.total_ff(Tree::Positive),
        config.total_ff(Tree::Negative)
    );
    if config.parasitic_ff > 0.0 {
        let _ = writeln!(w, "* membrane parasitic {}f per node, included in CA", config.parasitic_ff);
    }
    let _ = writeln!(
        w,
        "* bias voltages VB+ {} VB- {}",
        config.positive.bias_voltage, config.negative.bias_voltage
    );
    let _ = writeln!(w, ".param vmax={}", pc.v_max);
    for s in &config.synapses {
        let _ = writeln!(w, ".param x{}=0", s.index);
    }

    let _ = writeln!(w, "* synapse capacitors");
    for s in &config.synapses {
        let _ = writeln!(w, "CS{} {} s{} {}f", s.index, node(s.tree), s.index, s.cap_ff);
    }
    let _ = writeln!(w, "* bias capacitors");
    for tree in Tree::BOTH {
        let _ = writeln!(w, "CB{} {} pc {}f", tree.suffix(), node(tree), config.aux(tree).bias_ff);
    }
    let _ = writeln!(w, "* ballast capacitors");
    for tree in Tree::BOTH {
        let _ = writeln!(w, "CD{} {} 0 {}f", tree.suffix(), node(tree), config.aux(tree).ballast_ff);
    }

    let _ = writeln!(w, "* input switches: x=1 ties s to pc, x=0 to ground");
    for s in &config.synapses {
        let i = s.index;
        let _ = writeln!(w, "VX{i} x{i} 0 DC {{x{i}*vmax}}");
        let _ = writeln!(w, "SH{i} s{i} pc x{i} 0 SWHI");
        let _ = writeln!(w, "SL{i} s{i} 0 x{i} 0 SWLO");
    }
    let _ = writeln!(w, ".model SWHI SW(VT={{vmax/2}} RON=1 ROFF=1e12)");
    let _ = writeln!(w, ".model SWLO SW(VT={{vmax/2}} RON=1e12 ROFF=1)");

    let _ = writeln!(w, "* power clock, 0 to vmax");
    let half = pc.v_max / 2.0;
    let _ = writeln!(w, "VPC pc 0 SIN({half} {half} {f_op:.1} 0 0 -90)");
    let _ = writeln!(w, ".end");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::FixtureSet;
    use crate::mapper::{Synapse, TreeAux};

    fn cards(text: &str, prefix: &str) -> usize {
        text.lines().filter(|l| l.starts_with(prefix)).count()
    }

    #[test]
    fn published_config_has_sixteen_capacitors() {
        let cfg = FixtureSet::embedded().config().unwrap();
        let text = export_netlist(&cfg, &PowerClock::default()).unwrap();
        assert_eq!(cards(&text, "C"), 16);
        assert_eq!(cards(&text, "CS"), 12);
        assert_eq!(cards(&text, "S"), 24);
        assert!(text.contains("CS0 vmP s0 195f"));
        assert!(text.contains("CBN vmN pc 56f"));
        assert!(text.contains("CDP vmP 0 1159f"));
        assert_eq!(cards(&text, "VPC"), 1);
    }

    #[test]
    fn empty_negative_tree() {
        let aux = TreeAux {
            bias_ff: 35.0,
            ballast_ff: 100.0,
            bias_voltage: 0.0,
        };
        let cfg = AcnConfig::new(
            2,
            vec![
                Synapse {
                    index: 0,
                    tree: Tree::Positive,
                    cap_ff: 50.0,
                },
                Synapse {
                    index: 1,
                    tree: Tree::Positive,
                    cap_ff: 70.0,
                },
            ],
            aux,
            aux,
            0.0,
            50.0,
        )
        .unwrap();
        let text = export_netlist(&cfg, &PowerClock::default()).unwrap();
        assert!(!text.lines().any(|l| l.starts_with("CS") && l.contains("vmN")));
        assert!(text.contains("CBN vmN pc 35f"));
        assert!(text.contains("CDN vmN 0 100f"));
    }

    #[test]
    fn export_is_deterministic() {
        let cfg = FixtureSet::embedded().config().unwrap();
        let pc = PowerClock::default();
        let a = export_netlist(&cfg, &pc).unwrap();
        assert_eq!(a, export_netlist(&cfg.clone(), &pc).unwrap());
        let mut other = cfg.clone();
        other.positive.ballast_ff += 1.0;
        let b = export_netlist(&other, &pc).unwrap();
        assert_ne!(a.lines().nth(1), b.lines().nth(1));
    }
}
