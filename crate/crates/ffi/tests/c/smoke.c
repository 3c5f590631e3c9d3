#include <stdio.h>
#include <string.h>
#include "gl2ext.h"

#define CHECK(c) do { if (!(c)) { fprintf(stderr, "failed: %s (%s)\n", #c, gl2ext_last_error() ? gl2ext_last_error() : ""); return 1; } } while (0)

int main(void) {
    size_t total = 0;
    CHECK(gl2ext_oracle_total(3, -1, &total) == GL2EXT_STATUS_OK);
    CHECK(total == 19);
    CHECK(gl2ext_oracle_total(3, 2, &total) == GL2EXT_STATUS_INVALID_ARGUMENT);
    CHECK(gl2ext_last_error() != NULL);

    Gl2extBlock *b = NULL;
    CHECK(gl2ext_block_new(3, 2, -1, &b) == GL2EXT_STATUS_OK);
    CHECK(gl2ext_block_vertex_count(b) == 9);
    uint32_t from[2] = {1, 2}, to[2] = {1, 1};
    size_t d = 0;
    CHECK(gl2ext_block_ext_dim(b, from, to, 0, 0, 0, &d) == GL2EXT_STATUS_OK);
    char *json = NULL;
    CHECK(gl2ext_block_to_json(b, 0, &json) == GL2EXT_STATUS_OK);
    CHECK(strstr(json, "\"vertices\"") != NULL);
    gl2ext_string_free(json);
    gl2ext_block_free(b);
    printf("ok %zu\n", total);
    return 0;
}
