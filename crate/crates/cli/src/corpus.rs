//! Documents bundled with the binary, addressed as `bundled:<name>`.

pub const CORPUS: &[(&str, &str)] = &[
    ("action_c2_swap", include_str!("../corpus/action_c2_swap.json")),
    ("central_quadratic", include_str!("../corpus/central_quadratic.json")),
    ("cocycle_pair_2", include_str!("../corpus/cocycle_pair_2.json")),
    ("cocycle_pair_3", include_str!("../corpus/cocycle_pair_3.json")),
    ("compression_m2_diagonal", include_str!("../corpus/compression_m2_diagonal.json")),
    ("compression_m2_scalars", include_str!("../corpus/compression_m2_scalars.json")),
    ("directed_sum", include_str!("../corpus/directed_sum.json")),
    ("ext_c2_explicit", include_str!("../corpus/ext_c2_explicit.json")),
    ("ext_group_c2", include_str!("../corpus/ext_group_c2.json")),
    ("ext_group_c3", include_str!("../corpus/ext_group_c3.json")),
    ("ext_group_s3", include_str!("../corpus/ext_group_s3.json")),
    ("ext_m2_diagonal", include_str!("../corpus/ext_m2_diagonal.json")),
    ("ext_m2_scalars", include_str!("../corpus/ext_m2_scalars.json")),
    ("ext_m3_scalars", include_str!("../corpus/ext_m3_scalars.json")),
    ("group_c2", include_str!("../corpus/group_c2.json")),
    ("group_c3", include_str!("../corpus/group_c3.json")),
    ("group_s3", include_str!("../corpus/group_s3.json")),
    ("groupoid_equality_action", include_str!("../corpus/groupoid_equality_action.json")),
    ("pair_relation_2", include_str!("../corpus/pair_relation_2.json")),
    ("pair_relation_3", include_str!("../corpus/pair_relation_3.json")),
    ("partition_2_1", include_str!("../corpus/partition_2_1.json")),
    ("residual_pair_2", include_str!("../corpus/residual_pair_2.json")),
    ("residual_pair_3", include_str!("../corpus/residual_pair_3.json")),
    ("trivial_3", include_str!("../corpus/trivial_3.json")),
];

pub fn get(name: &str) -> Option<&'static str> {
    CORPUS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}
