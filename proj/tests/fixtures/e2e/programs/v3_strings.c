#include <stdio.h>
#include <string.h>

int main(void) {
  char buf[32];
  strcpy(buf, "compiler");
  strcat(buf, " testing");
  printf("%zu %s\n", strlen(buf), buf);
  return 0;
}
