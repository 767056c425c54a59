#pragma once

// Persona discovery: composite texts, spherical k-means, profiling exports,
// expert merge maps and majority-vote labeling.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "vplay/datamodel.hpp"

namespace vplay {
class Gateway;
}

namespace vplay::personas {

enum class SentimentTier { Positive, Negative, Neutral };
std::string_view tier_name(SentimentTier t);

// Positive iff rating >= 8, Negative iff rating <= 4, Neutral otherwise.
SentimentTier sentiment_tier(double rating);

struct CompositeText {
  SentimentTier sentiment_tier = SentimentTier::Neutral;
  std::vector<Facet> facets;  // canonical order
  std::string body;
  std::string rendered;  // "[SENTIMENT: <tier>] [FOCUS: <facets>] :: <body>"
};

CompositeText render_composite(const CuratedReview& review);

// ---- clustering -------------------------------------------------------------

struct ClusterOptions {
  int max_iterations = 300;
  double tolerance = 1e-4;  // max centroid shift (L2) that ends the fit
  int n_init = 1;           // restarts from derived seeds; lowest inertia wins
};

struct ClusterModel {
  int k = 15;
  std::vector<std::vector<double>> centroids;  // unit length
  std::map<std::string, int> assignments;      // review_id -> cluster
  std::uint64_t seed = 0;
  double inertia = 0.0;                        // sum of squared distances to centroids
  std::vector<double> inertia_trace;           // after each assignment step
  int iterations = 0;
};

// Spherical k-means with k-means++ seeding. `ids` name the rows of `vectors`.
// Throws ClusteringError with fewer than k distinct vectors.
ClusterModel cluster(const std::vector<std::string>& ids, const std::vector<std::vector<double>>& vectors,
                     int k, std::uint64_t seed, const ClusterOptions& options = {});

// Cluster index per row (same order as the fit input).
std::vector<int> assignment_vector(const ClusterModel& model, const std::vector<std::string>& ids);

// Adjusted Rand index between two labelings of the same items.
double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b);

// ---- profiling ------------------------------------------------------------

struct ProfilingSample {
  int cluster = 0;
  std::vector<std::string> review_ids;  // nearest to the centroid first
  std::string prompt;                   // profiling prompt with the samples filled in
};

// Per cluster, the `per_cluster` members with the highest cosine similarity to
// the centroid; ties go to the smaller review_id.
std::vector<ProfilingSample> export_profiling_samples(const ClusterModel& model,
                                                      const std::vector<std::string>& ids,
                                                      const std::vector<std::vector<double>>& vectors,
                                                      const std::map<std::string, std::string>& texts,
                                                      std::size_t per_cluster = 20);

// ---- merge map --------------------------------------------------------------

using MergeMap = std::map<int, Persona>;

// "cluster_index = persona name" lines; blank lines and '#' comments ignored.
MergeMap parse_merge_map(std::string_view text);
std::string format_merge_map(const MergeMap& map);
MergeMap load_merge_map(const std::filesystem::path& path);
void save_merge_map(const MergeMap& map, const std::filesystem::path& path);

struct ClusterPrior {
  int cluster = 0;
  Persona persona = Persona::SystemPurist;
  std::size_t members = 0;
};

// Cluster -> persona with member counts. Throws ValidationError unless the map
// covers exactly [0, k).
std::vector<ClusterPrior> apply_merge_map(const ClusterModel& model, const MergeMap& map);

// Member counts summed per persona.
std::map<Persona, std::size_t> persona_priors(const std::vector<ClusterPrior>& priors);

// ---- labeling -------------------------------------------------------------

// Modal vote; nullopt on a tie for the top count or when `votes` is empty.
PersonaLabel strict_mode(const std::vector<PersonaLabel>& votes);

// Modal label of the first votes; on a tie the extra votes are added and the
// mode retaken; a persisting tie is Unassigned.
PersonaLabel aggregate_votes(const std::vector<PersonaLabel>& votes, const std::vector<PersonaLabel>& extras);

struct LabelOptions {
  int votes = 3;
  int extra_votes = 2;
  std::size_t batch_size = 10;
  std::uint64_t seed = 0;
  int max_tokens = 2048;
};

// One persona label per review, in input order. Vote v of a review only depends
// on the review text, the persona definitions and the seed, so labels are
// independent of corpus order.
std::vector<PersonaLabel> label_personas(const std::vector<CuratedReview>& reviews,
                                         const std::vector<PersonaProfile>& personas, Gateway& gateway,
                                         const LabelOptions& options = {});

// The five canonical profiles with their definition text.
std::vector<PersonaProfile> canonical_profiles();

}  // namespace vplay::personas
