pub mod abelian;
pub mod charts;
pub mod cone;
pub mod corpus;
pub mod fan;
pub mod groupoid;
pub mod monoid;
pub mod par;
