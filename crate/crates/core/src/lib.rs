pub mod estimation;
pub mod fock;
pub mod gauge;
pub mod loopdecomp;
pub mod superselection;
pub mod protocols;
pub mod scenario;
