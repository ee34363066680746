pub mod cli;
pub mod data;
pub mod error;
pub mod evt;
pub mod models;
pub mod oracle;
pub mod returns;
pub mod sim;
pub mod special;
pub mod svg;
