#pragma once

#include "lieblab/ks_inversion.hpp"
#include "lieblab/lattice.hpp"
#include "lieblab/lieb_search.hpp"
#include "lieblab/response.hpp"
#include "lieblab/spectral_inverse.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace lieblab::io {

using Json = nlohmann::ordered_json;

/// "%.17g"; non-finite values print as nan / inf / -inf.
std::string format_double(double x);

/// Row-major matrix with a header row c0,c1,...
std::string matrix_csv(const Matrix& m);

/// Named columns of equal length. Shorter columns are padded with empty cells.
std::string columns_csv(const std::vector<std::string>& names,
                        const std::vector<std::vector<double>>& columns);

Json to_json(const Vector& v);
Json to_json(const std::vector<double>& v);
Json to_json(const InversionReport& r);
Json to_json(const ProbeReport& r);
Json to_json(const LiebEvaluation& e);
Json to_json(const EnergyDecomposition& d);
Json to_json(const RemainderTable& t);
Json to_json(const SpectralDecomposition& d);
Json to_json(const DirectionalProbe& p);

}  // namespace lieblab::io
