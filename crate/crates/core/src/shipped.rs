//! Model files bundled with the crate.

use crate::knotmodel::{load_ambient, AmbientSummary, KnotModel, ModelErrors};

pub const UNKNOT_S3: &str = include_str!("../models/unknot_s3.json");
pub const TREFOIL_RH_S3: &str = include_str!("../models/trefoil_rh_s3.json");
pub const FIGURE8_S3: &str = include_str!("../models/figure8_s3.json");
pub const SIGMA237_AMBIENT: &str = include_str!("../models/sigma237_ambient.json");
pub const SIGMA237_UNKNOT: &str = include_str!("../models/sigma237_unknot.json");
pub const SIGMA237_G1_SYNTHETIC: &str = include_str!("../models/sigma237_g1_synthetic.json");

/// Knot models, by file stem.
pub const MODEL_NAMES: [&str; 5] = [
    "unknot_s3",
    "trefoil_rh_s3",
    "figure8_s3",
    "sigma237_unknot",
    "sigma237_g1_synthetic",
];

fn text(name: &str) -> Option<&'static str> {
    let stem = name.strip_suffix(".json").unwrap_or(name);
    Some(match stem {
        "unknot_s3" => UNKNOT_S3,
        "trefoil_rh_s3" => TREFOIL_RH_S3,
        "figure8_s3" => FIGURE8_S3,
        "sigma237_ambient" => SIGMA237_AMBIENT,
        "sigma237_unknot" => SIGMA237_UNKNOT,
        "sigma237_g1_synthetic" => SIGMA237_G1_SYNTHETIC,
        _ => return None,
    })
}

/// Looks up a bundled knot model by name, with or without `.json`.
pub fn model(name: &str) -> Option<Result<KnotModel, ModelErrors>> {
    text(name).map(KnotModel::from_json)
}

/// Looks up a bundled ambient summary; model names yield their ambient.
pub fn ambient(name: &str) -> Option<Result<AmbientSummary, ModelErrors>> {
    text(name).map(load_ambient)
}
