"""
File-backed stores: CSV designs and outputs, NPZ basis expansions and GP
surrogates, result tables and the run manifest.

Sample usage:

    design = read_design("data/design.csv", space)
    outputs = read_outputs("data/outputs.csv")
    write_table(frame, "results/maps_summary.csv")
"""
