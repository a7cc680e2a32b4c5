/* lexrec: noisy-channel lexical error correction, C interface.
 *
 * Every function returns a lexrec_status. On failure the message of the last
 * error on the calling thread is available from lexrec_last_error(). Strings
 * returned through char** parameters are owned by the caller and released
 * with lexrec_string_free(). Handles are released with their _free function;
 * passing NULL to a _free function is a no-op.
 */
#ifndef LEXREC_LEXREC_H
#define LEXREC_LEXREC_H

#include <stddef.h>

#if defined(_WIN32)
#if defined(LEXREC_BUILDING)
#define LEXREC_API __declspec(dllexport)
#else
#define LEXREC_API __declspec(dllimport)
#endif
#else
#define LEXREC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lexrec_status {
  LEXREC_OK = 0,
  LEXREC_ERR_INPUT = 1,
  LEXREC_ERR_PARAMETER = 2,
  LEXREC_ERR_TRAINING = 3,
  LEXREC_ERR_NUMERIC = 4,
  LEXREC_ERR_NO_HYPOTHESIS = 5,
  LEXREC_ERR_EVALUATION = 6,
  LEXREC_ERR_IO = 7,
  LEXREC_ERR_INTERNAL = 8,
  LEXREC_ERR_NULL_ARGUMENT = 9
} lexrec_status;

typedef struct lexrec_lexicon lexrec_lexicon;
typedef struct lexrec_ld lexrec_ld;
typedef struct lexrec_recognizer lexrec_recognizer;
typedef struct lexrec_session lexrec_session;

/* Error-generating functions, combinable as a bit mask. */
enum {
  LEXREC_FN_DELETION = 1,
  LEXREC_FN_INSERTION = 2,
  LEXREC_FN_SUBSTITUTION = 4,
  LEXREC_FN_TRANSPOSITION = 8,
  LEXREC_FN_SPACE_INSERTION = 16,
  LEXREC_FN_DOUBLE_STROKE = 32
};

LEXREC_API const char* lexrec_version(void);
LEXREC_API const char* lexrec_status_name(lexrec_status status);
/* Message of the last failure on this thread; empty after a success. */
LEXREC_API const char* lexrec_last_error(void);
LEXREC_API void lexrec_string_free(char* s);

/* ---- orthographic decoder ------------------------------------------- */

typedef struct lexrec_od_options {
  int with_space_state;      /* 1: leading space state (connected text) */
  unsigned delta;            /* skip bound, >= 1 */
  double eps_obs;            /* observation smoothing floor */
  unsigned error_functions;  /* LEXREC_FN_* mask */
  int filter_real_words;
  unsigned max_iters;
  double conv_eps;
  const char* keyboard_path; /* NULL: built-in QWERTY */
} lexrec_od_options;

LEXREC_API void lexrec_od_options_init(lexrec_od_options* options);

/* Trains one word model per line of a lexicon file. */
LEXREC_API lexrec_status lexrec_lexicon_train(const char* lexicon_path,
                                              const lexrec_od_options* options,
                                              lexrec_lexicon** out);
LEXREC_API lexrec_status lexrec_lexicon_save(const lexrec_lexicon* lexicon, const char* dir);
LEXREC_API lexrec_status lexrec_lexicon_load(const char* dir, lexrec_lexicon** out);
LEXREC_API size_t lexrec_lexicon_size(const lexrec_lexicon* lexicon);
LEXREC_API void lexrec_lexicon_free(lexrec_lexicon* lexicon);

/* Isolated word recognition; beam < 0 means unbounded. */
LEXREC_API lexrec_status lexrec_lexicon_best_word(const lexrec_lexicon* lexicon, const char* input,
                                                  double beam, char** word, double* cost);

/* Error corpus of one word as "corruption<TAB>tag" lines. full_alphabet
 * replaces keyboard neighbours by every alphabet character for insertion and
 * substitution. */
LEXREC_API lexrec_status lexrec_generate_errors(const char* word, unsigned error_functions,
                                                const char* keyboard_path, int full_alphabet,
                                                char** dump);

/* ---- linguistic decoder -------------------------------------------------- */

typedef enum lexrec_ld_kind {
  LEXREC_LD_BASELINE = 0,
  LEXREC_LD_UNIGRAM = 1,
  LEXREC_LD_BIGRAM = 2
} lexrec_ld_kind;

typedef struct lexrec_ld_options {
  lexrec_ld_kind kind;
  const char* corpus_path;     /* untagged or tagged corpus */
  int tagged;                  /* bigram: 1 supervised, 0 unsupervised */
  const char* tagset_path;     /* bigram */
  const char* vocabulary_path; /* unigram: lexicon file */
  double eps_obs;              /* < 0: kind default */
  double eps_trans;            /* < 0: kind default */
  unsigned max_iters;
  double conv_eps;
} lexrec_ld_options;

LEXREC_API void lexrec_ld_options_init(lexrec_ld_options* options);
LEXREC_API lexrec_status lexrec_ld_train(const lexrec_ld_options* options, lexrec_ld** out);
LEXREC_API lexrec_status lexrec_ld_save(const lexrec_ld* ld, const char* path);
LEXREC_API lexrec_status lexrec_ld_load(const char* path, lexrec_ld** out);
LEXREC_API lexrec_ld_kind lexrec_ld_get_kind(const lexrec_ld* ld);
LEXREC_API void lexrec_ld_free(lexrec_ld* ld);

/* ---- connected text recognition ----------------------------------------- */

typedef struct lexrec_recognizer_options {
  double beam;   /* < 0: unbounded */
  size_t n_best; /* 0: the tag ambiguity of the language model */
} lexrec_recognizer_options;

LEXREC_API void lexrec_recognizer_options_init(lexrec_recognizer_options* options);
/* The recognizer keeps its own references; the lexicon and language model may
 * be freed afterwards. */
LEXREC_API lexrec_status lexrec_recognizer_create(const lexrec_lexicon* lexicon, const lexrec_ld* ld,
                                                  const lexrec_recognizer_options* options,
                                                  lexrec_recognizer** out);
LEXREC_API void lexrec_recognizer_free(lexrec_recognizer* recognizer);

/* Best reading of one line as space-separated words (word/TAG with_tags). */
LEXREC_API lexrec_status lexrec_correct(const lexrec_recognizer* recognizer, const char* line,
                                        int with_tags, char** corrected, double* cost);

LEXREC_API lexrec_status lexrec_session_create(const lexrec_recognizer* recognizer,
                                               lexrec_session** out);
LEXREC_API lexrec_status lexrec_session_feed(lexrec_session* session, const char* chars,
                                             size_t length);
/* Ends the session; it cannot be fed again. */
LEXREC_API lexrec_status lexrec_session_finalize(lexrec_session* session, int with_tags,
                                                 char** corrected, double* cost);
LEXREC_API void lexrec_session_free(lexrec_session* session);

/* ---- evaluation ------------------------------------------------------------ */

typedef enum lexrec_report_format { LEXREC_REPORT_TEXT = 0, LEXREC_REPORT_TSV = 1 } lexrec_report_format;

/* lexicon_path may be NULL (no real-word errors then). consistent receives 1
 * when the category counts add up and precision never exceeds recall. */
LEXREC_API lexrec_status lexrec_evaluate_files(const char* key_path, const char* run_path,
                                               const char* lexicon_path, lexrec_report_format format,
                                               char** report, int* consistent);

#ifdef __cplusplus
}
#endif

#endif /* LEXREC_LEXREC_H */
