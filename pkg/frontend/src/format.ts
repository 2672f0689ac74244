/**
 * Every number shown to the user is serialized exactly as JSON would
 * serialize the value received from the service, so rendered text is
 * always a verbatim fragment of some response body.
 */
export function fmt(value: number | null | undefined): string {
  if (value === null || value === undefined) {
    return "n/a";
  }
  return JSON.stringify(value);
}
