pub mod ttt_oracle;
