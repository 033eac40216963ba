use thiserror::Error;

/// Domain errors raised while evaluating the model at a decision point.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("negative demand: f(W_r) = a - b*W_r = {demand} < 0 at W_r = {w_r}")]
    NegativeDemand { w_r: f64, demand: f64 },

    #[error("backlog never clears: B2 = {b2} <= s*eta = {s_eta}")]
    BacklogNeverClears { b2: f64, s_eta: f64 },

    #[error("zero base demand: f(W_r) = 0 so the retailer cycle never ends (T3 is infinite)")]
    ZeroDemand,

    #[error("decision {name} = {value} is out of its domain ({requirement})")]
    InvalidDecision {
        name: &'static str,
        value: f64,
        requirement: &'static str,
    },

    #[error("missing carbon price {0} for the selected policy")]
    MissingPrice(&'static str),

    #[error("non-finite {0} (the decision point overflows the closed forms)")]
    NonFinite(&'static str),
}

/// Errors raised while loading or validating a [`crate::ModelParameters`] document.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("parameter document is not a JSON object")]
    NotAnObject,

    #[error("{}", schema_message(.unknown, .missing))]
    Schema { unknown: Vec<String>, missing: Vec<String> },

    #[error("parameter {key} = {value}: {reason}")]
    Invalid {
        key: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("malformed parameter document: {0}")]
    Malformed(String),
}

fn schema_message(unknown: &[String], missing: &[String]) -> String {
    let mut parts = Vec::new();
    if !missing.is_empty() {
        parts.push(format!("missing keys: {}", missing.join(", ")));
    }
    if !unknown.is_empty() {
        parts.push(format!("unknown keys: {}", unknown.join(", ")));
    }
    parts.join("; ")
}
