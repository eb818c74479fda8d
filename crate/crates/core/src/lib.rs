pub mod design;
pub mod gammalasso;
pub mod gibbs;
pub mod lineup;
pub mod numeric;
pub mod simgen;
