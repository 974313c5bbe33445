//! Exact representation counts and summatory values.

mod root;
mod summatory;
mod table;

pub use root::{integer_kth_root, is_perfect_power_u64, kth_root_big, kth_root_u64};
pub use summatory::{
    r_count, summatory_direct, summatory_direct_with, summatory_enumerate, summatory_enumerate_partitioned,
    summatory_fast, summatory_recursive, summatory_split_s2, Counter, RecursiveCounter, RootFn,
};
pub use table::{
    build_table, build_table_with, powers_up_to, CountTable, TableOptions, DEFAULT_CHUNK, DEFAULT_MEMORY_BUDGET,
};
