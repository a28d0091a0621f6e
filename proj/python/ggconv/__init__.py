"""Distance-geometric graph convolutions for 3D graphs.

The heavy lifting lives in the compiled extension; this package re-exports
its public surface.
"""

from ._core import (  # noqa: F401
    Activation,
    AngleEntry,
    AngleGeometricRepr,
    DihedralEntry,
    DistanceEntry,
    DistanceGeometricRepr,
    GgconvError,
    Graph3D,
    HyperparamSpace,
    Interval,
    Model,
    ModelConfig,
    NeighborOrder,
    OptimizeResult,
    PositionalRepr,
    PowerLawParams,
    Readout,
    RigidMotion,
    SplitResult,
    SplitSpec,
    TrainedModel,
    TrialRecord,
    WeightedAdjacency,
    __version__,
    angle,
    assemble_weighted_adjacency,
    build_angle_geometric,
    build_distance_geometric,
    build_positional,
    dihedral,
    edge_distance,
    enumerate_angle_triples,
    enumerate_dihedral_chains,
    evaluate,
    featurize_atoms,
    load_model,
    make_synthetic_dataset,
    model_forward,
    normalize,
    optimize,
    parse_jsonl,
    parse_sdf,
    power_law_weight,
    save_model,
    split,
    train,
    train_evaluate,
    uniform_adjacency,
    validate,
)
