pub mod atomspace;
pub mod engine;
pub mod lang;
pub mod lts;
pub mod metagraph;
pub mod minisys;
pub mod sexpr;
pub mod syntax;
