//! Parametric circular, linear and joint densities with their samplers.

pub mod catalog;
pub mod cdf_table;
pub mod circular;
pub mod joint;
pub mod linear;
pub mod sampling;

pub use catalog::{make_model, model_by_name, Deviation, MixtureAlternative};
pub use circular::{CircularDensity, CircularFamily, CircularKind};
pub use joint::{
    model_from_text, parse_key_values, ExpVonMises, JointModel, LinkCopula, LinkSign, Mardia, Marginal, MarginalFamily,
    ModelId, QsCopula, SineModel, Structure, WrappedNormalTorus,
};
pub use linear::{LinearDensity, LinearFamily};
pub use sampling::{link_copula_pair, sample_circular, sample_joint, sample_link_copula, JointSample};
