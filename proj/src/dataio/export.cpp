// Copyright 2026 The toporeform Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "toporeform/dataio/export.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <ostream>

#include "toporeform/error.hpp"

namespace toporeform::dataio {

std::size_t write_latents_csv(std::ostream& out, std::span<const int> labels, const Tensor& latents) {
  require(latents.rank() == 2 && latents.dim(0) == labels.size(), ErrorCode::LengthMismatch,
          "latent rows do not match the labels");
  const std::size_t d = latents.dim(1);
  out << "label";
  for (std::size_t k = 0; k < d; ++k) {
    out << ",z" << k;
  }
  out << '\n';
  const auto old = out.precision(17);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out << labels[i];
    for (std::size_t k = 0; k < d; ++k) {
      out << ',' << latents[i * d + k];
    }
    out << '\n';
  }
  out.precision(old);
  return labels.size();
}

std::size_t export_latents(const models::TopoAEModel& topoae, const Dataset& data,
                           const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  require(static_cast<bool>(out), ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  const std::size_t d = topoae.spec().latent;
  std::vector<double> codes;
  codes.reserve(data.size() * d);
  constexpr std::size_t chunk = 256;
  for (std::size_t start = 0; start < data.size(); start += chunk) {
    std::vector<std::size_t> idx(std::min(chunk, data.size() - start));
    std::iota(idx.begin(), idx.end(), start);
    Graph g(Graph::Mode::inference);
    const Tensor z = topoae.encode(g, data.subset(idx).images);
    codes.insert(codes.end(), z.data().begin(), z.data().end());
  }
  const std::size_t rows = write_latents_csv(out, data.labels, Tensor({data.size(), d}, std::move(codes)));
  require(static_cast<bool>(out), ErrorCode::IoError, "write failed for " + path.string());
  return rows;
}

}  // namespace toporeform::dataio
