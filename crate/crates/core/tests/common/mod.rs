#![allow(dead_code)]

pub mod bench_fixture;
pub mod corpus;
pub mod iban_oracle;
pub mod lexer_oracle;
pub mod mock_llm;
pub mod refgraph_fixture;
pub mod synth;
