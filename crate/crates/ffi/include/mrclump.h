#ifndef MRCLUMP_H
#define MRCLUMP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define MRC_RMS_VARIABLE 0

#define MRC_RMS_FIXED 1

#define MRC_LINK_CENTROID 0

#define MRC_LINK_PEAK 1

#define MRC_BORDER_SYMMETRIC 0

#define MRC_BORDER_PERIODIC 1

#define MRC_BORDER_ZERO 2

#define MRC_TAPS_LO_D 0

#define MRC_TAPS_HI_D 1

#define MRC_TAPS_LO_R 2

#define MRC_TAPS_HI_R 3

/**
 * Result of every fallible call.
 */
enum MrcStatus
#ifdef __cplusplus
  : int32_t
#endif // __cplusplus
 {
  MRC_STATUS_OK = 0,
  MRC_STATUS_NULL_ARGUMENT = 1,
  MRC_STATUS_INVALID_ARGUMENT = 2,
  MRC_STATUS_IO = 3,
  MRC_STATUS_FORMAT = 4,
  MRC_STATUS_UNSUPPORTED = 5,
  MRC_STATUS_NUMERIC = 6,
  MRC_STATUS_BUFFER_TOO_SMALL = 7,
  MRC_STATUS_PANIC = 8,
};
#ifndef __cplusplus
typedef int32_t MrcStatus;
#endif // __cplusplus

/**
 * Opaque result of [`mrc_analyze`].
 */
typedef struct MrcAnalysis MrcAnalysis;

/**
 * Opaque cube handle.
 */
typedef struct MrcCube MrcCube;

/**
 * Pipeline settings. Start from [`mrc_options_default`].
 */
typedef struct MrcOptions {
  /**
   * Wavelet name such as "db5"; NULL means db5.
   */
  const char *wavelet;
  uint32_t max_level;
  /**
   * `MRC_RMS_VARIABLE` or `MRC_RMS_FIXED`.
   */
  int32_t rms_mode;
  double noise_mult;
  double min_dip_mult;
  uint32_t min_pix;
  /**
   * 6 or 26.
   */
  uint32_t neighborhood;
  uint32_t bins;
  /**
   * `MRC_LINK_CENTROID` or `MRC_LINK_PEAK`.
   */
  int32_t link_mode;
  /**
   * One of the `MRC_BORDER_*` constants.
   */
  int32_t border;
} MrcOptions;

typedef struct MrcLevelRow {
  size_t level;
  double rms;
  double entropy;
  size_t n_clumps;
  size_t biggest_pix;
  double mean_pix;
  /**
   * RMS handed to the clump finder at this level.
   */
  double rms_used;
} MrcLevelRow;

typedef struct MrcTreeSummary {
  size_t n_nodes;
  size_t n_edges;
  size_t n_isolated;
} MrcTreeSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *mrc_version(void);

/**
 * Message of the last failure on this thread, or NULL. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *mrc_last_error(void);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library and not yet freed.
 */
void mrc_string_free(char *s);

/**
 * Builds a cube from `d0*d1*d2` doubles in C order (axis 2 fastest). NaN
 * marks a blank voxel.
 *
 * # Safety
 * `data` must point to `d0*d1*d2` readable doubles; `out` must be writable.
 */
MrcStatus mrc_cube_from_data(const double *data,
                             size_t d0,
                             size_t d1,
                             size_t d2,
                             struct MrcCube **out);

/**
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
MrcStatus mrc_cube_load_fits(const char *path, struct MrcCube **out);

/**
 * Loads little-endian float64 samples with the given dims.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
MrcStatus mrc_cube_load_raw(const char *path,
                            size_t d0,
                            size_t d1,
                            size_t d2,
                            struct MrcCube **out);

/**
 * Seeded cube of `n_gaussians` blended Gaussians plus white noise whose
 * standard deviation is `noise_fraction` times the noiseless peak.
 *
 * # Safety
 * `out` must be writable.
 */
MrcStatus mrc_cube_synth(size_t d0,
                         size_t d1,
                         size_t d2,
                         size_t n_gaussians,
                         double noise_fraction,
                         uint64_t seed,
                         struct MrcCube **out);

/**
 * # Safety
 * `cube` must be a live handle; `path` a NUL-terminated string.
 */
MrcStatus mrc_cube_save_fits(const struct MrcCube *cube, const char *path);

/**
 * # Safety
 * `cube` must be a live handle; `path` a NUL-terminated string.
 */
MrcStatus mrc_cube_save_raw(const struct MrcCube *cube, const char *path);

/**
 * Writes the three axis lengths to `dims`.
 *
 * # Safety
 * `cube` must be a live handle; `dims` must have room for 3 values.
 */
MrcStatus mrc_cube_dims(const struct MrcCube *cube, size_t *dims);

/**
 * Copies the samples in C order, NaN for blanks.
 *
 * # Safety
 * `cube` must be a live handle; `buf` must have room for `len` doubles.
 */
MrcStatus mrc_cube_copy_data(const struct MrcCube *cube, double *buf, size_t len);

/**
 * # Safety
 * `cube` must be NULL or a live handle; it is invalid afterwards.
 */
void mrc_cube_free(struct MrcCube *cube);

/**
 * Copies one filter of a wavelet bank. `which` is one of the
 * `MRC_TAPS_*` constants. The tap count is always written to `out_len`;
 * pass a NULL `buf` to query it.
 *
 * # Safety
 * `wavelet` must be a NUL-terminated string, `out_len` writable and `buf`
 * NULL or valid for `cap` doubles.
 */
MrcStatus mrc_filter_taps(const char *wavelet,
                          int32_t which,
                          double *buf,
                          size_t cap,
                          size_t *out_len);

struct MrcOptions mrc_options_default(void);

/**
 * Decomposes, segments and links `cube`. `opts` may be NULL for defaults.
 *
 * # Safety
 * `cube` must be a live handle, `opts` NULL or valid, `out` writable.
 */
MrcStatus mrc_analyze(const struct MrcCube *cube,
                      const struct MrcOptions *opts,
                      struct MrcAnalysis **out);

/**
 * Number of levels computed, including level 0. Returns 0 for NULL.
 *
 * # Safety
 * `a` must be NULL or a live handle.
 */
size_t mrc_analysis_level_count(const struct MrcAnalysis *a);

/**
 * # Safety
 * `a` must be a live handle; `out` writable.
 */
MrcStatus mrc_analysis_level_row(const struct MrcAnalysis *a,
                                 size_t level,
                                 struct MrcLevelRow *out);

/**
 * Copies the clump labels of `level` in C order; 0 is background.
 *
 * # Safety
 * `a` must be a live handle; `buf` must have room for `len` values.
 */
MrcStatus mrc_analysis_labels(const struct MrcAnalysis *a, size_t level, int32_t *buf, size_t len);

/**
 * Copies the full-size reconstruction of `level`, NaN for blanks.
 *
 * # Safety
 * `a` must be a live handle; `buf` must have room for `len` doubles.
 */
MrcStatus mrc_analysis_recon(const struct MrcAnalysis *a, size_t level, double *buf, size_t len);

/**
 * # Safety
 * `a` must be a live handle; `out` writable.
 */
MrcStatus mrc_analysis_tree_summary(const struct MrcAnalysis *a, struct MrcTreeSummary *out);

/**
 * Hierarchy as JSON. Free the string with [`mrc_string_free`].
 *
 * # Safety
 * `a` must be a live handle; `out` writable.
 */
MrcStatus mrc_analysis_tree_json(const struct MrcAnalysis *a, char **out);

/**
 * Hierarchy as Graphviz DOT. Free the string with [`mrc_string_free`].
 *
 * # Safety
 * `a` must be a live handle; `out` writable.
 */
MrcStatus mrc_analysis_tree_dot(const struct MrcAnalysis *a, char **out);

/**
 * Writes every export (stats, catalog, CAAs, FITS reconstructions, trees)
 * into `dir`, creating it if needed.
 *
 * # Safety
 * `a` must be a live handle; `dir` a NUL-terminated string.
 */
MrcStatus mrc_analysis_write(const struct MrcAnalysis *a, const char *dir);

/**
 * # Safety
 * `a` must be NULL or a live handle; it is invalid afterwards.
 */
void mrc_analysis_free(struct MrcAnalysis *a);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MRCLUMP_H */
