pub mod agreement;
pub mod gen;
pub mod oracle;
pub mod observer_case;
pub mod soundness;
