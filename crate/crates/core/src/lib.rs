//! Behavioral compiler and energy model for dual-tree single-clock adiabatic
//! capacitive neurons.
//!
//! A [`NeuronSpec`] is compiled by [`map_weights`] into an [`AcnConfig`]: one
//! capacitor per nonzero weight on the tree matching its sign, a bias
//! capacitor per tree and a ground-side ballast that balances the trees. The
//! remaining modules evaluate that configuration: membrane voltages and
//! clock loading ([`tree`]), comparator decisions ([`tl`]), per-operation
//! energy ([`energy`]) and process variation ([`montecarlo`]).

pub mod energy;
pub mod error;
pub mod fixtures;
pub mod mapper;
pub mod model;
pub mod montecarlo;
pub mod netlist;
pub mod report;
pub mod sim;
pub mod tl;
pub mod tree;
pub mod verify;

pub use error::{Error, Result};
pub use mapper::{
    check_feasibility, map_weights, quantize_capacitance, AcnConfig, CapRole, FeasibilityReport,
    Synapse, TreeAux, Violation,
};
pub use model::{
    eval_software_neuron, parse_input_vector, InputVector, NeuronSpec, TechProfile, Tree,
};
pub use tree::{
    capacitive_load, max_load_search, membrane_voltages, operating_frequency, swing_range,
    tree_capacitances, PowerClock, TreeState,
};
pub use energy::{calibrate_energy, energy_at_load, sweep, total_energy, EnergyBreakdown, EnergyParams, SweepAxis};
pub use fixtures::FixtureSet;
pub use montecarlo::{mc_run, mc_stats, sample_variation, McSummary, McTarget, VariationModel};
pub use netlist::export_netlist;
pub use sim::{simulate, SimResult};
pub use tl::{tl_decide, tl_energy, Corner, TlModel, TlVariant};
pub use verify::{verify, VerifyFilter, VerifyReport};
