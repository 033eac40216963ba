//! Exogenous model constants.
//!
//! [`ModelParameters`] serializes to a flat JSON object whose keys are the
//! ASCII symbol names (`"P"`, `"P_r"`, `"beta1"`, `"C_Tax"`, ...). Loading goes
//! through [`ModelParameters::from_json`], which rejects unknown keys and
//! reports every missing key at once.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::ParamError;
use crate::policy::PolicyKind;

/// Which reading of the printed closed forms to evaluate.
///
/// `AsDerived` (the default) uses the forms implied by the balance equations
/// and boundary conditions. `AsPrinted` keeps the two printed variants that
/// can still be evaluated: the demand-phase inventory branch written with
/// `e^{θ_m(T1 − t)}`, and the retailer revenue prefactor `P_r` in place of
/// `W_r`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormulaMode {
    #[default]
    AsDerived,
    AsPrinted,
}

macro_rules! model_parameters {
    ($( $(#[$doc:meta])* $field:ident => $key:literal, )*) => {
        /// All exogenous constants of the model.
        ///
        /// The carbon prices are optional: a document only has to carry the
        /// price of the policy it is evaluated under.
        #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
        #[serde(deny_unknown_fields)]
        pub struct ModelParameters {
            $( $(#[$doc])* #[serde(rename = $key)] pub $field: f64, )*
            /// Carbon tax ($/tonne).
            #[serde(rename = "C_Tax", default, skip_serializing_if = "Option::is_none")]
            pub c_tax: Option<f64>,
            /// Cap-and-trade carbon price ($/tonne).
            #[serde(rename = "C_CT", default, skip_serializing_if = "Option::is_none")]
            pub c_ct: Option<f64>,
            #[serde(default, skip_serializing_if = "is_default_mode")]
            pub formula_mode: FormulaMode,
        }

        impl ModelParameters {
            /// Keys every parameter document must carry.
            pub const REQUIRED_KEYS: &'static [&'static str] = &[$($key),*];

            /// Look up a constant by its document key.
            pub fn get(&self, key: &str) -> Option<f64> {
                match key {
                    $($key => Some(self.$field),)*
                    "C_Tax" => self.c_tax,
                    "C_CT" => self.c_ct,
                    _ => None,
                }
            }

            /// Mutable access to a constant by its document key.
            pub fn get_mut(&mut self, key: &str) -> Option<&mut f64> {
                match key {
                    $($key => Some(&mut self.$field),)*
                    "C_Tax" => self.c_tax.as_mut(),
                    "C_CT" => self.c_ct.as_mut(),
                    _ => None,
                }
            }
        }
    };
}

fn is_default_mode(mode: &FormulaMode) -> bool {
    *mode == FormulaMode::AsDerived
}

model_parameters! {
    /// Production rate (units/year).
    p => "P",
    /// Rework rate (units/year).
    p_r => "P_r",
    /// Fraction of defectives produced.
    f_d => "f_d",
    /// Type-I inspection error probability.
    beta1 => "beta1",
    /// Type-II inspection error probability.
    beta2 => "beta2",
    /// Base deterioration rate at the manufacturer (1/year).
    theta1 => "theta1",
    /// Base deterioration rate at the retailer (1/year).
    theta2 => "theta2",
    /// Manufacturer preservation efficiency.
    v1 => "v1",
    /// Retailer preservation efficiency.
    v2 => "v2",
    /// Retailer demand rate on the manufacturer (units/year).
    d_r => "D_r",
    /// Demand intercept.
    a => "a",
    /// Demand price slope.
    b => "b",
    /// Stock-dependent consumption parameter (1/year).
    eta => "eta",
    w_m => "W_m",
    c_p => "C_p",
    c_r => "C_r",
    c_g => "C_g",
    c_op => "C_op",
    c_or => "C_or",
    i_c => "i_c",
    h_p => "h_p",
    h_d => "h_d",
    h_r => "h_r",
    d_cp => "d_cp",
    d_cd => "d_cd",
    d_cr => "d_cr",
    o_r => "O_r",
    c_s => "C_s",
    /// Goodwill-impairment fraction of retailer profit.
    f_r => "f_r",
    e_p => "E_p",
    e_t => "E_t",
    e_h1 => "E_h1",
    e_h2 => "E_h2",
    e_hr => "E_hr",
    e_d1 => "E_d1",
    e_d2 => "E_d2",
    e_dr => "E_dr",
    /// Delivery distance (km).
    d1 => "d1",
    l1 => "l1",
    l2 => "l2",
    l3 => "l3",
    l4 => "l4",
    kappa1 => "kappa1",
    kappa2 => "kappa2",
    /// Manufacturer's share of green investment.
    omega => "omega",
    u1 => "U1",
    u2 => "U2",
}

impl ModelParameters {
    /// The reference parameter set.
    ///
    /// The set does not include the preservation efficiencies, so they are
    /// arguments. Setup costs are not listed either and are set to zero.
    /// Carbon prices are left unset.
    pub fn reference(v1: f64, v2: f64) -> Self {
        ModelParameters {
            p: 7500.0,
            p_r: 2500.0,
            f_d: 0.05,
            beta1: 0.04,
            beta2: 0.06,
            theta1: 0.15,
            theta2: 0.1,
            v1,
            v2,
            d_r: 400.0,
            a: 30.0,
            b: 0.1,
            eta: 1.6,
            w_m: 80.0,
            c_p: 15.0,
            c_r: 5.0,
            c_g: 4.0,
            c_op: 0.0,
            c_or: 0.0,
            i_c: 4.0,
            h_p: 5.0,
            h_d: 3.0,
            h_r: 2.1,
            d_cp: 1.2,
            d_cd: 1.5,
            d_cr: 0.05,
            o_r: 130.0,
            c_s: 2.0,
            f_r: 0.01,
            e_p: 0.15,
            e_t: 0.11,
            e_h1: 0.12,
            e_h2: 0.1,
            e_hr: 0.14,
            e_d1: 0.13,
            e_d2: 0.15,
            e_dr: 0.12,
            d1: 25.0,
            l1: 15.0,
            l2: 3.0,
            l3: 100.0,
            l4: 2.8,
            kappa1: 1.45,
            kappa2: 0.8,
            omega: 0.6,
            u1: 30.0,
            u2: 120.0,
            c_tax: None,
            c_ct: None,
            formula_mode: FormulaMode::AsDerived,
        }
    }

    pub fn with_carbon_tax(mut self, price: f64) -> Self {
        self.c_tax = Some(price);
        self
    }

    pub fn with_cap_trade_price(mut self, price: f64) -> Self {
        self.c_ct = Some(price);
        self
    }

    pub fn with_formula_mode(mut self, mode: FormulaMode) -> Self {
        self.formula_mode = mode;
        self
    }

    /// Every key a document may carry, required or not.
    pub fn known_keys() -> impl Iterator<Item = &'static str> {
        Self::REQUIRED_KEYS
            .iter()
            .copied()
            .chain(["C_Tax", "C_CT", "formula_mode"])
    }

    /// Parse and validate a parameter document.
    ///
    /// When `policy` is given, its carbon price becomes mandatory as well.
    pub fn from_json(doc: &Value, policy: Option<PolicyKind>) -> Result<Self, ParamError> {
        let map = doc.as_object().ok_or(ParamError::NotAnObject)?;

        let mut unknown: Vec<String> = map
            .keys()
            .filter(|k| !Self::known_keys().any(|known| known == k.as_str()))
            .cloned()
            .collect();
        unknown.sort();

        let mut missing: Vec<String> = Self::REQUIRED_KEYS
            .iter()
            .filter(|k| !map.contains_key(**k))
            .map(|k| k.to_string())
            .collect();
        if let Some(key) = policy.and_then(PolicyKind::price_key) {
            if !map.contains_key(key) {
                missing.push(key.to_string());
            }
        }

        if !unknown.is_empty() || !missing.is_empty() {
            return Err(ParamError::Schema { unknown, missing });
        }

        let params: ModelParameters =
            serde_json::from_value(doc.clone()).map_err(|e| ParamError::Malformed(e.to_string()))?;
        params.validate()?;
        Ok(params)
    }

    pub fn from_json_str(text: &str, policy: Option<PolicyKind>) -> Result<Self, ParamError> {
        let doc: Value = serde_json::from_str(text).map_err(|e| ParamError::Malformed(e.to_string()))?;
        Self::from_json(&doc, policy)
    }

    /// Check the domain invariants of every constant.
    pub fn validate(&self) -> Result<(), ParamError> {
        fn invalid(key: &'static str, value: f64, reason: &'static str) -> ParamError {
            ParamError::Invalid { key, value, reason }
        }

        for &key in Self::REQUIRED_KEYS {
            let value = self.get(key).unwrap_or(f64::NAN);
            if !value.is_finite() {
                return Err(invalid(key, value, "must be finite"));
            }
            if value < 0.0 {
                return Err(invalid(key, value, "must be nonnegative"));
            }
        }
        for (key, price) in [("C_Tax", self.c_tax), ("C_CT", self.c_ct)] {
            if let Some(value) = price {
                if !value.is_finite() || value < 0.0 {
                    return Err(invalid(key, value, "must be finite and nonnegative"));
                }
            }
        }

        if self.p_r <= 0.0 {
            return Err(invalid("P_r", self.p_r, "must be positive"));
        }
        if self.p <= self.p_r {
            return Err(invalid("P", self.p, "must exceed the rework rate P_r"));
        }
        for (key, value) in [
            ("f_d", self.f_d),
            ("beta1", self.beta1),
            ("beta2", self.beta2),
            ("f_r", self.f_r),
        ] {
            if value >= 1.0 {
                return Err(invalid(key, value, "must lie in [0, 1)"));
            }
        }
        if self.omega > 1.0 {
            return Err(invalid("omega", self.omega, "must lie in [0, 1]"));
        }
        for (key, value) in [
            ("eta", self.eta),
            ("v1", self.v1),
            ("v2", self.v2),
            ("a", self.a),
            ("b", self.b),
            ("D_r", self.d_r),
            ("kappa1", self.kappa1),
            ("kappa2", self.kappa2),
        ] {
            if value <= 0.0 {
                return Err(invalid(key, value, "must be positive"));
            }
        }
        if self.eta > 1.0 {
            log::warn!(
                "eta = {} lies outside the (0, 1] range assumed for stock-dependent demand",
                self.eta
            );
        }
        Ok(())
    }

    /// Highest admissible retail price, where base demand `a − b·W_r` hits zero.
    pub fn max_retail_price(&self) -> f64 {
        self.a / self.b
    }
}
