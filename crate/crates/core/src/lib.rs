pub mod actions;
pub mod bimodules;
pub mod generators;
pub mod groupoid;
pub mod io;
pub mod invsemi;
pub mod lattice;
pub mod quantale;
pub mod report;
pub mod unionfind;
pub mod verify;
