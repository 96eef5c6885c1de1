#!/usr/bin/env python3
"""Regenerates include/dppsearch/sobol_table.hpp from the Joe-Kuo
new-joe-kuo-6.21201 direction numbers bundled with scipy."""
import os
import sys

import numpy as np
import scipy

DIMS = int(sys.argv[1]) if len(sys.argv) > 1 else 1024

src = os.path.join(os.path.dirname(scipy.__file__), "stats",
                   "_sobol_direction_numbers.npz")
data = np.load(src)
poly, vinit = data["poly"][:DIMS], data["vinit"][:DIMS]

out = []
out.append("// Generated by tools/gen_sobol_table.py; do not edit.")
out.append("// Joe-Kuo direction numbers (new-joe-kuo-6.21201), first %d dimensions." % DIMS)
out.append("// Row layout: primitive polynomial (with leading and trailing bits), then")
out.append("// the initial direction numbers m_1..m_s padded with zeros.")
out.append("#ifndef DPPSEARCH_SOBOL_TABLE_HPP")
out.append("#define DPPSEARCH_SOBOL_TABLE_HPP")
out.append("")
out.append("#include <array>")
out.append("#include <cstddef>")
out.append("#include <cstdint>")
out.append("")
out.append("namespace dppsearch::detail {")
out.append("")
out.append("inline constexpr std::size_t kSobolMaxDim = %d;" % DIMS)
out.append("inline constexpr std::size_t kSobolMaxDegree = %d;" % vinit.shape[1])
out.append("")
out.append("struct SobolRow {")
out.append("  std::uint32_t poly;")
out.append("  std::array<std::uint32_t, kSobolMaxDegree> m;")
out.append("};")
out.append("")
out.append("inline constexpr std::array<SobolRow, kSobolMaxDim> kSobolTable = {{")
for p, v in zip(poly, vinit):
    nz = [str(int(x)) for x in v]
    while len(nz) > 1 and nz[-1] == "0":
        nz.pop()
    out.append("    {%d, {%s}}," % (int(p), ", ".join(nz)))
out.append("}};")
out.append("")
out.append("}  // namespace dppsearch::detail")
out.append("")
out.append("#endif  // DPPSEARCH_SOBOL_TABLE_HPP")

dst = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "include",
                   "dppsearch", "sobol_table.hpp")
with open(dst, "w") as f:
    f.write("\n".join(out) + "\n")
