//! Example documents shipped with the binary.
//!
//! Any experiment or extension argument may name one of these as `bundled:<name>`.

use timesym::onticlab::document::extension_to_json;
use timesym::onticlab::{build_toy_model_extension, distinct_state_labels};
use timesym::opmodel::document::experiment_to_json;
use timesym::opmodel::{build_chsh_experiment, build_cr_experiment, build_price_experiment};
use timesym::BigRational;

pub const PREFIX: &str = "bundled:";

/// `(name, file name, contents)` in a fixed order.
pub const DOCUMENTS: &[(&str, &str, &str)] = &[
    ("chsh", "chsh.json", include_str!("../assets/chsh.json")),
    ("price", "price.json", include_str!("../assets/price.json")),
    (
        "price-no-measurement",
        "price-no-measurement.json",
        include_str!("../assets/price-no-measurement.json"),
    ),
    (
        "toy-model",
        "toy-model.ontic.json",
        include_str!("../assets/toy-model.ontic.json"),
    ),
    ("cr-1", "cr-1.json", include_str!("../assets/cr-1.json")),
    ("cr-2", "cr-2.json", include_str!("../assets/cr-2.json")),
    ("cr-3", "cr-3.json", include_str!("../assets/cr-3.json")),
    ("cr-4", "cr-4.json", include_str!("../assets/cr-4.json")),
    ("cr-5", "cr-5.json", include_str!("../assets/cr-5.json")),
    ("cr-6", "cr-6.json", include_str!("../assets/cr-6.json")),
];

pub fn lookup(name: &str) -> Option<&'static str> {
    DOCUMENTS.iter().find(|(n, _, _)| *n == name).map(|(_, _, text)| *text)
}

/// The document each bundled file should contain, rebuilt from the constructors.
pub fn regenerate(name: &str) -> Option<String> {
    let text = match name {
        "chsh" => experiment_to_json(&build_chsh_experiment::<f64>()),
        "price" => experiment_to_json(&build_price_experiment::<f64>(true)),
        "price-no-measurement" => experiment_to_json(&build_price_experiment::<f64>(false)),
        "toy-model" => {
            let ext = build_toy_model_extension::<BigRational>();
            let labels = distinct_state_labels(ext.scenario());
            extension_to_json(&ext, Some(labels))
        }
        _ => {
            let n: usize = name.strip_prefix("cr-")?.parse().ok()?;
            experiment_to_json(&build_cr_experiment::<f64>(n))
        }
    };
    Some(text + "\n")
}
