#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "carpetlab/complex_point.hpp"
#include "carpetlab/report.hpp"

namespace carpetlab::atlas {

inline constexpr int kMaxSurveySide = 4096;

struct Region {
    double re_min = -1.0;
    double re_max = 1.0;
    double im_min = -1.0;
    double im_max = 1.0;
};

struct SurveyRequest {
    Region region;
    int width = 64;   ///< cells along the real axis
    int height = 64;  ///< cells along the imaginary axis
    int n = 3;
    int max_steps = 1000;

    /// Centre of cell (i, j); row 0 is the top (im_max) edge.
    ComplexPoint cell_center(int i, int j) const noexcept;
};

/// Throws InvalidParameter for a malformed request (inverted region, grid out of [1, 4096], n < 3).
void validate(const SurveyRequest& request);

std::string canonical_json(const SurveyRequest& request);
std::string request_digest(const SurveyRequest& request);

/// cells * max_steps * 5 (base run plus stability re-runs, one at twice the steps).
std::uint64_t survey_work(const SurveyRequest& request);

struct SurveyResult {
    SurveyRequest request;
    std::string digest;
    std::vector<int> codes;  ///< row-major tag codes (see tag_code)
    std::map<std::string, std::uint64_t> histogram;

    Json to_json() const;
    static SurveyResult from_json(const Json& doc);
};

/// Classifies every cell centre. Rows already present in `resume_codes` (the
/// first resume_rows rows) are kept; `on_rows` is called after each block of
/// completed rows with the codes so far.
SurveyResult run_survey(const SurveyRequest& request, int threads,
                        const std::vector<int>& resume_codes = {}, int resume_rows = 0,
                        const std::function<void(int rows_done, const std::vector<int>& codes)>& on_rows = {});

/// Finished surveys and row checkpoints keyed by request digest.
class SurveyStore {
public:
    explicit SurveyStore(std::filesystem::path root);

    std::optional<SurveyResult> load(const std::string& digest) const;
    void save(const SurveyResult& result) const;

    /// Runs the survey or returns the stored result, resuming from a checkpoint when one exists.
    SurveyResult run_or_resume(const SurveyRequest& request, int threads,
                               const std::function<void(int rows_done)>& progress = {}) const;

    /// Rows completed in an unfinished checkpoint, if any.
    std::optional<int> checkpoint_rows(const std::string& digest) const;

private:
    std::filesystem::path result_path(const std::string& digest) const;
    std::filesystem::path checkpoint_path(const std::string& digest) const;

    std::filesystem::path root_;
};

}  // namespace carpetlab::atlas
