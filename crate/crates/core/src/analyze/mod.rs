//! Association diagnostics: per-observation and per-cell weights, Fréchet
//! support curves, demo data generators and plot emitters.

mod data;
mod demo;
mod frechet;
mod plot;
mod weights;

pub use data::{lag_pairs, mental_health_table};
pub use demo::{gen_demo_data, DemoKind};
pub use frechet::{frechet_curves, CurveSign, Segment};
pub use plot::{
    cell_svg, curves_svg, render_cell_svg, render_scatter_svg, scatter_svg, weights_csv, write_weights_csv, Gridlines,
    PLOT_SIZE,
};
pub use weights::{
    cell_weights_component, cell_weights_overall, component_gridlines, weights_component, weights_overall,
    AssociationWeights, CellWeights, WeightKind,
};
