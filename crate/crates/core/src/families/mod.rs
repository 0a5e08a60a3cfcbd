//! Concrete families.

pub mod cfa;
pub mod multinomial;
pub mod mvnormal;
pub mod normal;
pub mod rasch;
pub mod twopl;

pub use cfa::Cfa3;
pub use multinomial::MultinomialFamily;
pub use mvnormal::{MvNormal, MvNormalVariant};
pub use normal::Normal1D;
pub use rasch::RaschTest;
pub use twopl::TwoPLGrouped;
