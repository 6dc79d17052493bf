pub mod em_oracle;
